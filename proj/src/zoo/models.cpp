#include "zoo/models.hpp"

#include "common/error.hpp"

namespace advkit::zoo {

namespace {

template <class S>
void add_conv_block(nn::Sequential<S>& net, const std::string& name, int in, int out, int k, int stride, Rng& rng) {
    net.template add<nn::Conv2d<S>>(name + ".conv", in, out, k, stride, k / 2, rng);
    net.template add<nn::BatchNorm2d<S>>(name + ".bn", out);
    net.template add<nn::ReLU<S>>();
}

template <class S>
void add_res_block(nn::Sequential<S>& net, const std::string& name, int ch, Rng& rng) {
    auto body = std::make_unique<nn::Sequential<S>>();
    body->template add<nn::Conv2d<S>>(name + ".c1", ch, ch, 3, 1, 1, rng);
    body->template add<nn::BatchNorm2d<S>>(name + ".b1", ch);
    body->template add<nn::ReLU<S>>();
    body->template add<nn::Conv2d<S>>(name + ".c2", ch, ch, 3, 1, 1, rng);
    body->template add<nn::BatchNorm2d<S>>(name + ".b2", ch);
    net.template add<nn::Residual<S>>(std::move(body));
    net.template add<nn::ReLU<S>>();
}

// Appends backbone + global average pooling; returns the feature width.
template <class S>
int build_backbone(nn::Sequential<S>& net, const std::string& arch, Rng& rng) {
    int feat = 0;
    if (arch == "cnn_a") {
        add_conv_block(net, "b1", 3, 16, 3, 1, rng);
        add_conv_block(net, "b2", 16, 32, 3, 2, rng);
        add_conv_block(net, "b3", 32, 32, 3, 1, rng);
        add_conv_block(net, "b4", 32, 64, 3, 2, rng);
        feat = 64;
    } else if (arch == "cnn_b") {
        add_conv_block(net, "b1", 3, 20, 5, 1, rng);
        add_conv_block(net, "b2", 20, 40, 3, 2, rng);
        add_conv_block(net, "b3", 40, 40, 3, 1, rng);
        add_conv_block(net, "b4", 40, 80, 3, 2, rng);
        feat = 80;
    } else if (arch == "res_a") {
        add_conv_block(net, "b1", 3, 16, 3, 1, rng);
        add_res_block(net, "r1", 16, rng);
        add_conv_block(net, "b2", 16, 32, 3, 2, rng);
        add_res_block(net, "r2", 32, rng);
        add_conv_block(net, "b3", 32, 64, 3, 2, rng);
        add_res_block(net, "r3", 64, rng);
        feat = 64;
    } else if (arch == "vgg_t") {
        add_conv_block(net, "b1", 3, 16, 3, 1, rng);
        add_conv_block(net, "b2", 16, 16, 3, 1, rng);
        add_conv_block(net, "b3", 16, 32, 3, 2, rng);
        add_conv_block(net, "b4", 32, 32, 3, 1, rng);
        add_conv_block(net, "b5", 32, 64, 3, 2, rng);
        add_conv_block(net, "b6", 64, 64, 3, 1, rng);
        feat = 64;
    } else {
        fail_input("unknown architecture '" + arch + "'");
    }
    net.template add<nn::GlobalAvgPool<S>>();
    return feat;
}

}  // namespace

std::vector<std::string> classifier_archs() { return {"cnn_a", "cnn_b", "res_a", "vgg_t"}; }

template <class S>
Classifier<S>::Classifier(const std::string& arch, int num_classes, int image_size, std::uint64_t init_seed)
    : arch_(arch), num_classes_(num_classes), image_size_(image_size) {
    require(num_classes >= 2, ErrorCode::invalid_parameter, "need at least two classes");
    Rng rng(init_seed);
    const int feat = build_backbone(net_, arch, rng);
    head_ = net_.template add<nn::Linear<S>>("head", feat, num_classes, rng, 1.0);
}

template <class S>
nn::Tensor<S> Classifier<S>::logits(const nn::Tensor<S>& x, bool train) {
    require(x.rank() == 4 && x.dim(2) == image_size_ && x.dim(3) == image_size_, ErrorCode::invalid_input,
            "classifier input shape mismatch");
    return net_.forward(x, train);
}

template <class S>
nn::Tensor<S> Classifier<S>::input_grad(const nn::Tensor<S>& dlogits) {
    return net_.backward(dlogits);
}

template <class S>
std::vector<nn::Param<S>*> Classifier<S>::params() {
    std::vector<nn::Param<S>*> out;
    net_.collect_params(out);
    return out;
}

template <class S>
dpp::ClassSpace Classifier<S>::class_space() const {
    const auto& w = head_->weight().value;  // [K, D]
    dpp::ClassSpace space;
    space.weights = Eigen::MatrixXd(w.dim(1), w.dim(0));
    for (int k = 0; k < w.dim(0); ++k)
        for (int d = 0; d < w.dim(1); ++d) space.weights(d, k) = static_cast<double>(w.at(k, d));
    space.class_ids.resize(static_cast<std::size_t>(num_classes_));
    for (int k = 0; k < num_classes_; ++k) space.class_ids[static_cast<std::size_t>(k)] = k;
    return space;
}

template <class S>
EmbeddingModel<S>::EmbeddingModel(const std::string& arch, int num_ids, int image_size, int emb_dim,
                                  std::uint64_t init_seed)
    : arch_(arch), num_ids_(num_ids), image_size_(image_size), emb_dim_(emb_dim) {
    require(num_ids >= 2 && emb_dim >= 2, ErrorCode::invalid_parameter, "bad embedding model sizes");
    Rng rng(init_seed);
    const int feat = build_backbone(trunk_, arch, rng);
    trunk_.template add<nn::Linear<S>>("emb", feat, emb_dim, rng, 1.0);
    trunk_.template add<nn::L2NormalizeRows<S>>();
    head_.template add<nn::Linear<S>>("id_head", emb_dim, num_ids, rng, 1.0);
    // Unit embeddings cap raw logits at ~1; the fixed scale restores a usable
    // softmax temperature for training.
    head_.template add<nn::Scale<S>>(S(10));
}

template <class S>
nn::Tensor<S> EmbeddingModel<S>::embed(const nn::Tensor<S>& x, bool train) {
    require(x.rank() == 4 && x.dim(2) == image_size_ && x.dim(3) == image_size_, ErrorCode::invalid_input,
            "embedding model input shape mismatch");
    return trunk_.forward(x, train);
}

template <class S>
nn::Tensor<S> EmbeddingModel<S>::embed_grad(const nn::Tensor<S>& demb) {
    return trunk_.backward(demb);
}

template <class S>
nn::Tensor<S> EmbeddingModel<S>::head_logits(const nn::Tensor<S>& emb, bool train) {
    return head_.forward(emb, train);
}

template <class S>
nn::Tensor<S> EmbeddingModel<S>::head_grad(const nn::Tensor<S>& dlogits) {
    return head_.backward(dlogits);
}

template <class S>
std::vector<nn::Param<S>*> EmbeddingModel<S>::params() {
    std::vector<nn::Param<S>*> out;
    trunk_.collect_params(out);
    head_.collect_params(out);
    return out;
}

template class Classifier<float>;
template class Classifier<double>;
template class EmbeddingModel<float>;
template class EmbeddingModel<double>;

io::Checkpoint classifier_checkpoint(Classifier<float>& model) {
    io::Checkpoint ckpt;
    ckpt.meta["kind"] = "classifier";
    ckpt.meta["arch"] = model.arch();
    ckpt.meta["num_classes"] = std::to_string(model.num_classes());
    ckpt.meta["image_size"] = std::to_string(model.image_size());
    io::store_params(ckpt, model.params());
    return ckpt;
}

std::unique_ptr<Classifier<float>> classifier_from_checkpoint(const io::Checkpoint& ckpt) {
    require(ckpt.meta_at("kind") == "classifier", ErrorCode::io, "checkpoint is not a classifier");
    auto model = std::make_unique<Classifier<float>>(ckpt.meta_at("arch"), ckpt.meta_int("num_classes"),
                                                     ckpt.meta_int("image_size"), 0);
    io::load_params(ckpt, model->params());
    return model;
}

io::Checkpoint embedding_checkpoint(EmbeddingModel<float>& model) {
    io::Checkpoint ckpt;
    ckpt.meta["kind"] = "embedding";
    ckpt.meta["arch"] = model.arch();
    ckpt.meta["num_classes"] = std::to_string(model.num_ids());
    ckpt.meta["image_size"] = std::to_string(model.image_size());
    ckpt.meta["emb_dim"] = std::to_string(model.emb_dim());
    io::store_params(ckpt, model.params());
    return ckpt;
}

std::unique_ptr<EmbeddingModel<float>> embedding_from_checkpoint(const io::Checkpoint& ckpt) {
    require(ckpt.meta_at("kind") == "embedding", ErrorCode::io, "checkpoint is not an embedding model");
    auto model = std::make_unique<EmbeddingModel<float>>(ckpt.meta_at("arch"), ckpt.meta_int("num_classes"),
                                                         ckpt.meta_int("image_size"), ckpt.meta_int("emb_dim"), 0);
    io::load_params(ckpt, model->params());
    return model;
}

}  // namespace advkit::zoo
