#include "zoo/datasets.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace advkit::zoo {

namespace {

constexpr int kSize = 32;

float quantize(float v) {
    v = std::min(1.0f, std::max(0.0f, v));
    return static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
}

struct Rgb {
    float r, g, b;
};

void fill_noise_background(nn::TensorF& img, const Rgb& bg, Rng& rng, double noise) {
    for (int c = 0; c < 3; ++c) {
        const float base = c == 0 ? bg.r : (c == 1 ? bg.g : bg.b);
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x)
                img.ptr()[(static_cast<std::int64_t>(c) * kSize + y) * kSize + x] =
                    base + static_cast<float>(rng.uniform(-noise, noise));
    }
}

void quantize_all(nn::TensorF& img) {
    for (auto& v : img.data) v = quantize(v);
}

// ----------------------------------------------------------------- shapes --

// Solid membership test for the outline-style families (0..6), parameterized
// by a size scale so the hollow variant can subtract a shrunken copy.
bool inside_outline_family(int family, double dx, double dy, double r) {
    switch (family) {
        case 0:  // circle
            return dx * dx + dy * dy <= r * r;
        case 1:  // square
            return std::abs(dx) <= r * 0.82 && std::abs(dy) <= r * 0.82;
        case 2: {  // triangle, apex up
            if (dy < -r || dy > r) return false;
            const double t = (dy + r) / (2.0 * r);  // 0 at apex, 1 at base
            return std::abs(dx) <= t * r;
        }
        case 3: {  // triangle, apex down
            if (dy < -r || dy > r) return false;
            const double t = (r - dy) / (2.0 * r);
            return std::abs(dx) <= t * r;
        }
        case 4:  // diamond
            return std::abs(dx) + std::abs(dy) <= r * 1.15;
        case 5: {  // plus
            const double w = 0.38 * r;
            return (std::abs(dx) <= w && std::abs(dy) <= r) || (std::abs(dy) <= w && std::abs(dx) <= r);
        }
        case 6: {  // diagonal cross
            const double w = 0.45 * r;
            if (std::max(std::abs(dx), std::abs(dy)) > r) return false;
            return std::abs(dx - dy) <= w || std::abs(dx + dy) <= w;
        }
        default:
            fail_input("unknown shape family");
    }
}

// Texture families (7..9) live in a square window. Their class pairs differ
// by structure (stripe duty cycle, checker cell size), not by inversion: the
// random center jitter randomizes the pattern phase, so an inverted pattern
// would be indistinguishable from the original.
bool inside_texture_family(int family, double dx, double dy, double r, double cell, double duty) {
    if (std::abs(dx) > r || std::abs(dy) > r) return false;
    switch (family) {
        case 7:
            return std::fmod(dy + 4.0 * cell, cell) < cell * duty;  // horizontal stripes
        case 8:
            return std::fmod(dx + 4.0 * cell, cell) < cell * duty;  // vertical stripes
        case 9: {
            const int ix = static_cast<int>(std::floor((dx + 5.0 * cell) / cell));
            const int iy = static_cast<int>(std::floor((dy + 5.0 * cell) / cell));
            return (ix + iy) % 2 == 0;
        }
        default:
            fail_input("unknown texture family");
    }
}

class ShapesDataset final : public Dataset {
public:
    std::string name() const override { return "shapes"; }
    int num_classes() const override { return 20; }
    int image_size() const override { return kSize; }

    nn::TensorF render(int label, Rng& rng) const override {
        require(label >= 0 && label < 20, ErrorCode::invalid_input, "shape label out of range");
        const int family = label / 2;
        const bool hollow = label % 2 == 1;

        nn::TensorF img({3, kSize, kSize});
        const Rgb bg{static_cast<float>(rng.uniform(0.08, 0.30)), static_cast<float>(rng.uniform(0.08, 0.30)),
                     static_cast<float>(rng.uniform(0.08, 0.30))};
        Rgb fg{static_cast<float>(rng.uniform(0.55, 0.95)), static_cast<float>(rng.uniform(0.55, 0.95)),
               static_cast<float>(rng.uniform(0.55, 0.95))};
        fill_noise_background(img, bg, rng, 0.035);

        const double cx = kSize / 2.0 + rng.uniform(-3.5, 3.5);
        const double cy = kSize / 2.0 + rng.uniform(-3.5, 3.5);
        const double r = rng.uniform(7.5, 11.0);
        const double shrink = 1.0 - rng.uniform(0.30, 0.42);  // hollow wall thickness
        const double duty = hollow ? 0.30 : 0.60;             // stripe families
        const double cell = family == 9 ? (hollow ? rng.uniform(2.8, 3.8) : rng.uniform(5.0, 7.0))
                                        : rng.uniform(4.2, 6.2);

        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                bool on;
                if (family <= 6) {
                    on = inside_outline_family(family, dx, dy, r);
                    if (on && hollow) on = !inside_outline_family(family, dx, dy, r * shrink);
                } else {
                    on = inside_texture_family(family, dx, dy, r, cell, duty);
                }
                if (on) {
                    img.at(0, 0, y, x) = fg.r + static_cast<float>(rng.uniform(-0.03, 0.03));
                    img.at(0, 1, y, x) = fg.g + static_cast<float>(rng.uniform(-0.03, 0.03));
                    img.at(0, 2, y, x) = fg.b + static_cast<float>(rng.uniform(-0.03, 0.03));
                }
            }
        quantize_all(img);
        return img;
    }
};

// ------------------------------------------------------------------ faces --

struct FaceIdentity {
    double face_a, face_b;      // oval semi-axes
    Rgb skin, hair, lip;
    double eye_y, eye_dx, eye_r;
    double nose_len, nose_w;
    double mouth_y, mouth_w, mouth_curve;
    double hair_h;
    double brow_y;
};

FaceIdentity identity_params(int id) {
    Rng rng(0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(id) * 7919u);
    FaceIdentity f;
    f.face_a = rng.uniform(9.0, 12.5);
    f.face_b = rng.uniform(11.0, 14.5);
    f.skin = {static_cast<float>(rng.uniform(0.70, 0.95)), static_cast<float>(rng.uniform(0.55, 0.80)),
              static_cast<float>(rng.uniform(0.45, 0.70))};
    f.hair = {static_cast<float>(rng.uniform(0.05, 0.45)), static_cast<float>(rng.uniform(0.05, 0.35)),
              static_cast<float>(rng.uniform(0.05, 0.30))};
    f.lip = {static_cast<float>(rng.uniform(0.55, 0.85)), static_cast<float>(rng.uniform(0.15, 0.35)),
             static_cast<float>(rng.uniform(0.20, 0.40))};
    f.eye_y = rng.uniform(-4.5, -2.0);
    f.eye_dx = rng.uniform(3.2, 5.6);
    f.eye_r = rng.uniform(1.1, 2.1);
    f.nose_len = rng.uniform(2.0, 4.5);
    f.nose_w = rng.uniform(0.7, 1.5);
    f.mouth_y = rng.uniform(3.5, 6.5);
    f.mouth_w = rng.uniform(3.0, 5.8);
    f.mouth_curve = rng.uniform(-1.2, 1.2);
    f.hair_h = rng.uniform(2.5, 6.5);
    f.brow_y = f.eye_y - rng.uniform(1.8, 3.0);
    return f;
}

class FacesDataset final : public Dataset {
public:
    std::string name() const override { return "faces"; }
    int num_classes() const override { return 20; }
    int image_size() const override { return kSize; }

    nn::TensorF render(int label, Rng& rng) const override {
        require(label >= 0 && label < 20, ErrorCode::invalid_input, "identity out of range");
        const FaceIdentity f = identity_params(label);

        const double ox = rng.uniform(-1.8, 1.8);  // pose shift
        const double oy = rng.uniform(-1.8, 1.8);
        const float light = static_cast<float>(rng.uniform(0.85, 1.15));

        nn::TensorF img({3, kSize, kSize});
        const Rgb bg{0.16f, 0.18f, 0.22f};
        fill_noise_background(img, bg, rng, 0.02);

        auto put = [&](int x, int y, const Rgb& col) {
            if (x < 0 || x >= kSize || y < 0 || y >= kSize) return;
            img.at(0, 0, y, x) = col.r * light;
            img.at(0, 1, y, x) = col.g * light;
            img.at(0, 2, y, x) = col.b * light;
        };

        const double cx = kSize / 2.0 + ox, cy = kSize / 2.0 + oy;
        for (int y = 0; y < kSize; ++y)
            for (int x = 0; x < kSize; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                const double oval = (dx * dx) / (f.face_a * f.face_a) + (dy * dy) / (f.face_b * f.face_b);
                if (oval <= 1.0) {
                    put(x, y, f.skin);
                    // hair band across the top of the oval
                    if (dy < -f.face_b + f.hair_h) put(x, y, f.hair);
                    // brows
                    if (std::abs(dy - f.brow_y) <= 0.7 && std::abs(std::abs(dx) - f.eye_dx) <= f.eye_r + 0.6)
                        put(x, y, f.hair);
                    // eyes: white disc + dark pupil
                    for (int side = -1; side <= 1; side += 2) {
                        const double ex = dx - side * f.eye_dx, ey = dy - f.eye_y;
                        const double d2 = ex * ex + ey * ey;
                        if (d2 <= f.eye_r * f.eye_r) put(x, y, {0.92f, 0.92f, 0.92f});
                        if (d2 <= f.eye_r * f.eye_r * 0.22) put(x, y, {0.06f, 0.06f, 0.10f});
                    }
                    // nose: vertical wedge
                    if (dy >= 0.0 && dy <= f.nose_len && std::abs(dx) <= f.nose_w * (0.4 + 0.6 * dy / f.nose_len))
                        put(x, y, {f.skin.r * 0.78f, f.skin.g * 0.78f, f.skin.b * 0.78f});
                    // mouth: curved band
                    const double mx = dx / f.mouth_w;
                    if (std::abs(mx) <= 1.0) {
                        const double my = f.mouth_y + f.mouth_curve * (mx * mx - 0.5);
                        if (std::abs(dy - my) <= 0.9) put(x, y, f.lip);
                    }
                }
            }
        // mild sensor noise on top
        for (auto& v : img.data) v += static_cast<float>(rng.uniform(-0.02, 0.02));
        quantize_all(img);
        return img;
    }
};

}  // namespace

Batch Dataset::sample(int count, Rng& rng) const {
    require(count >= 1, ErrorCode::invalid_parameter, "sample count must be positive");
    Batch b;
    b.images = nn::TensorF({count, 3, image_size(), image_size()});
    b.labels.resize(static_cast<std::size_t>(count));
    const std::int64_t per = static_cast<std::int64_t>(3) * image_size() * image_size();
    for (int i = 0; i < count; ++i) {
        const int label = rng.uniform_int(num_classes());
        b.labels[static_cast<std::size_t>(i)] = label;
        nn::TensorF img = render(label, rng);
        std::copy(img.data.begin(), img.data.end(), b.images.data.begin() + static_cast<std::ptrdiff_t>(i * per));
    }
    return b;
}

Batch Dataset::fixed_set(int per_class, std::uint64_t seed) const {
    std::vector<int> labels(static_cast<std::size_t>(num_classes()));
    for (int i = 0; i < num_classes(); ++i) labels[static_cast<std::size_t>(i)] = i;
    return fixed_set_of(labels, per_class, seed);
}

Batch Dataset::fixed_set_of(const std::vector<int>& labels, int per_label, std::uint64_t seed) const {
    require(!labels.empty() && per_label >= 1, ErrorCode::invalid_parameter, "empty fixed set requested");
    Rng rng(seed);
    const int count = static_cast<int>(labels.size()) * per_label;
    Batch b;
    b.images = nn::TensorF({count, 3, image_size(), image_size()});
    b.labels.resize(static_cast<std::size_t>(count));
    const std::int64_t per = static_cast<std::int64_t>(3) * image_size() * image_size();
    int i = 0;
    for (int rep = 0; rep < per_label; ++rep)
        for (int label : labels) {
            b.labels[static_cast<std::size_t>(i)] = label;
            nn::TensorF img = render(label, rng);
            std::copy(img.data.begin(), img.data.end(), b.images.data.begin() + static_cast<std::ptrdiff_t>(i * per));
            ++i;
        }
    return b;
}

std::unique_ptr<Dataset> make_dataset(const std::string& name) {
    if (name == "shapes") return std::make_unique<ShapesDataset>();
    if (name == "faces") return std::make_unique<FacesDataset>();
    fail_input("unknown dataset '" + name + "' (expected shapes|faces)");
}

}  // namespace advkit::zoo
