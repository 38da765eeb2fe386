#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpp/kdpp.hpp"
#include "io/checkpoint.hpp"
#include "nn/layers.hpp"

namespace advkit::zoo {

// Known classifier architectures. Deliberately heterogeneous (kernel sizes,
// depth, residual vs plain) so that cross-architecture transfer is meaningful.
//   cnn_a   plain 4-conv net, batch norm
//   cnn_b   wider net with a 5x5 stem
//   res_a   three residual blocks
//   vgg_t   stacked 3x3 pairs
std::vector<std::string> classifier_archs();

// Image classifier: backbone ending in GAP, then one linear layer to logits.
// The final layer's weight columns are the class space used for partitioning.
template <class S>
class Classifier {
public:
    Classifier(const std::string& arch, int num_classes, int image_size, std::uint64_t init_seed);

    nn::Tensor<S> logits(const nn::Tensor<S>& x, bool train);
    // Back-propagate d loss / d logits from the last forward; returns
    // d loss / d input and accumulates parameter gradients.
    nn::Tensor<S> input_grad(const nn::Tensor<S>& dlogits);

    std::vector<nn::Param<S>*> params();
    dpp::ClassSpace class_space() const;

    const std::string& arch() const { return arch_; }
    int num_classes() const { return num_classes_; }
    int image_size() const { return image_size_; }

private:
    std::string arch_;
    int num_classes_, image_size_;
    nn::Sequential<S> net_;
    nn::Linear<S>* head_ = nullptr;
};

// Face-style embedding model: backbone -> GAP -> linear -> L2-normalized
// embedding. A scaled linear head on top turns it into a classifier during
// training; verification uses squared distance between embeddings.
template <class S>
class EmbeddingModel {
public:
    EmbeddingModel(const std::string& arch, int num_ids, int image_size, int emb_dim, std::uint64_t init_seed);

    nn::Tensor<S> embed(const nn::Tensor<S>& x, bool train);        // [B, emb_dim], unit rows
    nn::Tensor<S> embed_grad(const nn::Tensor<S>& demb);            // d loss / d input
    nn::Tensor<S> head_logits(const nn::Tensor<S>& emb, bool train);  // [B, num_ids]
    nn::Tensor<S> head_grad(const nn::Tensor<S>& dlogits);          // d loss / d embedding

    std::vector<nn::Param<S>*> params();  // backbone + embedding + head

    const std::string& arch() const { return arch_; }
    int num_ids() const { return num_ids_; }
    int emb_dim() const { return emb_dim_; }
    int image_size() const { return image_size_; }

private:
    std::string arch_;
    int num_ids_, image_size_, emb_dim_;
    nn::Sequential<S> trunk_;  // image -> normalized embedding
    nn::Sequential<S> head_;   // embedding -> scaled logits
};

// Checkpoint bridges. Classifier checkpoints carry arch/num_classes/
// image_size metadata; embedding checkpoints additionally emb_dim, the cached
// per-identity reference embeddings, and the verification threshold.
io::Checkpoint classifier_checkpoint(Classifier<float>& model);
std::unique_ptr<Classifier<float>> classifier_from_checkpoint(const io::Checkpoint& ckpt);

io::Checkpoint embedding_checkpoint(EmbeddingModel<float>& model);
std::unique_ptr<EmbeddingModel<float>> embedding_from_checkpoint(const io::Checkpoint& ckpt);

}  // namespace advkit::zoo
