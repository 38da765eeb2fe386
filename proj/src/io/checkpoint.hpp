#pragma once

#include <map>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace advkit::io {

// Binary container for named float tensors plus string metadata. Used for
// classifier and generator weights; byte-exact round trips.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::map<std::string, nn::TensorF> tensors;

    const std::string& meta_at(const std::string& key) const;
    int meta_int(const std::string& key) const;
    double meta_double(const std::string& key) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copy collected parameters (weights and running buffers) into / out of a
// checkpoint. Loading is strict: every parameter must be present with the
// exact shape.
void store_params(Checkpoint& ckpt, const std::vector<nn::Param<float>*>& params);
void load_params(const Checkpoint& ckpt, const std::vector<nn::Param<float>*>& params);

}  // namespace advkit::io
