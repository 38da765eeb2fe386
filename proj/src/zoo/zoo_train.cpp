#include "zoo/zoo_train.hpp"

#include <algorithm>
#include <cmath>

#include "common/hash.hpp"
#include "io/csv.hpp"
#include "nn/adam.hpp"
#include "nn/loss.hpp"

namespace advkit::zoo {

namespace {

constexpr int kEvalChunk = 64;

std::uint64_t model_init_seed(const ZooTrainConfig& cfg) {
    return fnv1a(cfg.arch + ":" + cfg.dataset) ^ (cfg.seed * 0x9e3779b97f4a7c15ull);
}

nn::TensorF batch_slice(const nn::TensorF& images, int from, int count) {
    nn::TensorF out({count, images.dim(1), images.dim(2), images.dim(3)});
    const std::int64_t per = images.numel() / images.dim(0);
    std::copy(images.data.begin() + static_cast<std::ptrdiff_t>(from * per),
              images.data.begin() + static_cast<std::ptrdiff_t>((from + count) * per), out.data.begin());
    return out;
}

}  // namespace

double eval_accuracy(Classifier<float>& model, const Batch& batch) {
    const int n = batch.images.dim(0);
    int correct = 0;
    for (int from = 0; from < n; from += kEvalChunk) {
        const int count = std::min(kEvalChunk, n - from);
        nn::TensorF chunk = batch_slice(batch.images, from, count);
        nn::TensorF logits = model.logits(chunk, false);
        for (int i = 0; i < count; ++i)
            if (nn::argmax_row(logits, i) == batch.labels[static_cast<std::size_t>(from + i)]) ++correct;
    }
    return static_cast<double>(correct) / n;
}

nn::TensorF embed_all(EmbeddingModel<float>& model, const nn::TensorF& images) {
    const int n = images.dim(0);
    nn::TensorF out({n, model.emb_dim()});
    for (int from = 0; from < n; from += kEvalChunk) {
        const int count = std::min(kEvalChunk, n - from);
        nn::TensorF emb = model.embed(batch_slice(images, from, count), false);
        std::copy(emb.data.begin(), emb.data.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(from) * model.emb_dim());
    }
    return out;
}

ZooTrainResult train_classifier(const ZooTrainConfig& cfg, io::Checkpoint& out_ckpt) {
    require(cfg.iters >= 1 && cfg.batch >= 2, ErrorCode::invalid_parameter, "bad training config");
    auto data = make_dataset(cfg.dataset);
    Classifier<float> model(cfg.arch, data->num_classes(), data->image_size(), model_init_seed(cfg));
    Rng data_rng(cfg.seed * 1000003ull + 17);
    nn::Adam<float> opt(model.params(), cfg.lr);

    double tail_loss = 0.0;
    int tail_n = 0;
    for (int it = 0; it < cfg.iters; ++it) {
        if (it == cfg.iters * 7 / 10) opt.set_lr(cfg.lr * 0.3);
        Batch batch = data->sample(cfg.batch, data_rng);
        nn::TensorF logits = model.logits(batch.images, true);
        auto loss = nn::targeted_cross_entropy(logits, batch.labels);
        require(std::isfinite(loss.value), ErrorCode::training_failure, "classifier loss diverged");
        opt.zero_grad();
        (void)model.input_grad(loss.grad);
        opt.step();
        if (it >= cfg.iters - 50) {
            tail_loss += loss.value;
            ++tail_n;
        }
    }

    Batch eval = data->fixed_set(25, 424242);
    ZooTrainResult res;
    res.eval_accuracy = eval_accuracy(model, eval);
    res.final_loss = tail_loss / std::max(1, tail_n);

    out_ckpt = classifier_checkpoint(model);
    out_ckpt.meta["dataset"] = cfg.dataset;
    out_ckpt.meta["seed"] = std::to_string(cfg.seed);
    out_ckpt.meta["iters"] = std::to_string(cfg.iters);
    out_ckpt.meta["eval_accuracy"] = io::CsvWriter::num(res.eval_accuracy);
    return res;
}

ZooTrainResult train_embedding_model(const ZooTrainConfig& cfg, io::Checkpoint& out_ckpt) {
    require(cfg.iters >= 1 && cfg.batch >= 2, ErrorCode::invalid_parameter, "bad training config");
    auto data = make_dataset(cfg.dataset);
    const int num_ids = data->num_classes();
    EmbeddingModel<float> model(cfg.arch, num_ids, data->image_size(), cfg.emb_dim, model_init_seed(cfg));
    Rng data_rng(cfg.seed * 1000003ull + 39);
    nn::Adam<float> opt(model.params(), cfg.lr);

    double tail_loss = 0.0;
    int tail_n = 0;
    for (int it = 0; it < cfg.iters; ++it) {
        if (it == cfg.iters * 7 / 10) opt.set_lr(cfg.lr * 0.3);
        Batch batch = data->sample(cfg.batch, data_rng);
        nn::TensorF emb = model.embed(batch.images, true);
        nn::TensorF logits = model.head_logits(emb, true);
        auto loss = nn::targeted_cross_entropy(logits, batch.labels);
        require(std::isfinite(loss.value), ErrorCode::training_failure, "embedding loss diverged");
        opt.zero_grad();
        nn::TensorF demb = model.head_grad(loss.grad);
        (void)model.embed_grad(demb);
        opt.step();
        if (it >= cfg.iters - 50) {
            tail_loss += loss.value;
            ++tail_n;
        }
    }

    // Reference embeddings: mean of 8 gallery renders per identity, renormalized.
    Batch gallery = data->fixed_set(8, 515151);
    nn::TensorF gal_emb = embed_all(model, gallery.images);
    nn::TensorF refs({num_ids, cfg.emb_dim});
    std::vector<int> counts(static_cast<std::size_t>(num_ids), 0);
    for (int i = 0; i < gal_emb.dim(0); ++i) {
        const int id = gallery.labels[static_cast<std::size_t>(i)];
        ++counts[static_cast<std::size_t>(id)];
        for (int d = 0; d < cfg.emb_dim; ++d) refs.at(id, d) += gal_emb.at(i, d);
    }
    for (int id = 0; id < num_ids; ++id) {
        double sq = 0.0;
        for (int d = 0; d < cfg.emb_dim; ++d) {
            refs.at(id, d) /= static_cast<float>(counts[static_cast<std::size_t>(id)]);
            sq += static_cast<double>(refs.at(id, d)) * refs.at(id, d);
        }
        const float norm = static_cast<float>(std::max(std::sqrt(sq), 1e-12));
        for (int d = 0; d < cfg.emb_dim; ++d) refs.at(id, d) /= norm;
    }

    // Probe set for threshold calibration and identification accuracy.
    Batch probes = data->fixed_set(6, 626262);
    nn::TensorF probe_emb = embed_all(model, probes.images);
    auto sq_dist = [&](int row, int id) {
        double s = 0.0;
        for (int d = 0; d < cfg.emb_dim; ++d) {
            const double diff = static_cast<double>(probe_emb.at(row, d)) - refs.at(id, d);
            s += diff * diff;
        }
        return s;
    };

    std::vector<double> genuine, impostor;
    int correct_id = 0;
    for (int i = 0; i < probe_emb.dim(0); ++i) {
        const int true_id = probes.labels[static_cast<std::size_t>(i)];
        double best = 1e30;
        int best_id = -1;
        for (int id = 0; id < num_ids; ++id) {
            const double d = sq_dist(i, id);
            if (d < best) {
                best = d;
                best_id = id;
            }
            (id == true_id ? genuine : impostor).push_back(d);
        }
        if (best_id == true_id) ++correct_id;
    }

    // Equal-error threshold over the pooled genuine/impostor distances.
    std::vector<double> all = genuine;
    all.insert(all.end(), impostor.begin(), impostor.end());
    std::sort(all.begin(), all.end());
    double best_gap = 1e30, threshold = all.front();
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const double t = 0.5 * (all[i] + all[i + 1]);
        const double frr =
            static_cast<double>(std::count_if(genuine.begin(), genuine.end(), [&](double d) { return d >= t; })) /
            static_cast<double>(genuine.size());
        const double far =
            static_cast<double>(std::count_if(impostor.begin(), impostor.end(), [&](double d) { return d < t; })) /
            static_cast<double>(impostor.size());
        const double gap = std::abs(far - frr);
        if (gap < best_gap) {
            best_gap = gap;
            threshold = t;
        }
    }

    ZooTrainResult res;
    res.eval_accuracy = static_cast<double>(correct_id) / probe_emb.dim(0);
    res.final_loss = tail_loss / std::max(1, tail_n);
    res.verify_threshold = threshold;

    out_ckpt = embedding_checkpoint(model);
    out_ckpt.meta["dataset"] = cfg.dataset;
    out_ckpt.meta["seed"] = std::to_string(cfg.seed);
    out_ckpt.meta["iters"] = std::to_string(cfg.iters);
    out_ckpt.meta["eval_accuracy"] = io::CsvWriter::num(res.eval_accuracy);
    out_ckpt.meta["verify_threshold"] = io::CsvWriter::num(threshold);
    out_ckpt.tensors["ref.embeddings"] = refs;
    return res;
}

}  // namespace advkit::zoo
