#pragma once

#include <cstdint>
#include <string>

#include "dpp/kdpp.hpp"

namespace advkit::dpp {

struct PartitionDocument {
    ClassPartition partition;
    std::uint64_t seed = 0;
    double bandwidth = 0.0;
    bool bandwidth_auto = true;
    int num_classes = 0;
};

void save_partition(const PartitionDocument& doc, const std::string& path);
PartitionDocument load_partition(const std::string& path);

}  // namespace advkit::dpp
