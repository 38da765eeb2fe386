#pragma once

#include <string>

#include "io/checkpoint.hpp"
#include "zoo/datasets.hpp"
#include "zoo/models.hpp"

namespace advkit::zoo {

struct ZooTrainConfig {
    std::string arch = "cnn_a";
    std::string dataset = "shapes";
    int iters = 1500;
    int batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    int emb_dim = 32;  // embedding models only
};

struct ZooTrainResult {
    double eval_accuracy = 0.0;   // held-out classification accuracy
    double final_loss = 0.0;      // mean loss over the last 50 iterations
    double verify_threshold = 0;  // embedding models: EER distance threshold
};

// Trains a classifier on the named dataset; fills `out_ckpt` with weights and
// metadata (dataset, eval accuracy, seed). Deterministic in the config.
ZooTrainResult train_classifier(const ZooTrainConfig& cfg, io::Checkpoint& out_ckpt);

// Trains an embedding model by scaled-softmax identity classification, caches
// per-identity reference embeddings ("ref.embeddings"), and calibrates the
// squared-distance verification threshold at the genuine/impostor equal-error
// point ("verify_threshold" metadata).
ZooTrainResult train_embedding_model(const ZooTrainConfig& cfg, io::Checkpoint& out_ckpt);

// Batched eval-mode accuracy (argmax of logits vs labels).
double eval_accuracy(Classifier<float>& model, const Batch& batch);

// Eval-mode embeddings of a batch, in chunks.
nn::TensorF embed_all(EmbeddingModel<float>& model, const nn::TensorF& images);

}  // namespace advkit::zoo
