#pragma once

#include <memory>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace advkit::zoo {

struct Batch {
    nn::TensorF images;       // [B, 3, H, W] in [0, 1], values quantized to n/255
    std::vector<int> labels;  // length B
};

// Procedural image source: every sample is rendered on demand from the rng,
// so the data stream is unlimited and fully reproducible from a seed.
class Dataset {
public:
    virtual ~Dataset() = default;
    virtual std::string name() const = 0;
    virtual int num_classes() const = 0;
    virtual int image_size() const = 0;
    virtual nn::TensorF render(int label, Rng& rng) const = 0;  // [3, H, W]

    // `count` images with labels drawn uniformly from [0, num_classes).
    Batch sample(int count, Rng& rng) const;
    // Balanced, seed-determined held-out set (classes cycle 0..K-1).
    Batch fixed_set(int per_class, std::uint64_t seed) const;
    // As fixed_set but restricted to the given labels.
    Batch fixed_set_of(const std::vector<int>& labels, int per_label, std::uint64_t seed) const;
};

// "shapes": 20 classes = 10 geometric families x {solid, hollow}. Family
// pairs are semantically close, which gives the class space its cluster
// structure. "faces": 20 synthetic identities with pose/lighting jitter.
std::unique_ptr<Dataset> make_dataset(const std::string& name);

}  // namespace advkit::zoo
