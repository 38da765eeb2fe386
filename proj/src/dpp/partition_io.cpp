#include "dpp/partition_io.hpp"

#include <fstream>
#include <json.hpp>

namespace advkit::dpp {

using nlohmann::json;

void save_partition(const PartitionDocument& doc, const std::string& path) {
    json j;
    j["format"] = "advkit.partition";
    j["version"] = 1;
    j["k"] = doc.partition.subset_size;
    j["seed"] = doc.seed;
    j["bandwidth"] = doc.bandwidth;
    j["bandwidth_mode"] = doc.bandwidth_auto ? "auto" : "fixed";
    j["num_classes"] = doc.num_classes;
    j["subsets"] = doc.partition.subsets;
    std::ofstream out(path);
    require(out.good(), ErrorCode::io, "cannot open partition file for writing: " + path);
    out << j.dump(2) << "\n";
    require(out.good(), ErrorCode::io, "failed writing partition file: " + path);
}

PartitionDocument load_partition(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::io, "cannot open partition file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail_io("malformed partition file " + path + ": " + e.what());
    }
    require(j.value("format", "") == "advkit.partition", ErrorCode::io, "not an advkit partition file: " + path);
    PartitionDocument doc;
    doc.partition.subset_size = j.at("k").get<int>();
    doc.seed = j.at("seed").get<std::uint64_t>();
    doc.bandwidth = j.at("bandwidth").get<double>();
    doc.bandwidth_auto = j.value("bandwidth_mode", "auto") == "auto";
    doc.num_classes = j.at("num_classes").get<int>();
    doc.partition.subsets = j.at("subsets").get<std::vector<std::vector<int>>>();
    return doc;
}

}  // namespace advkit::dpp
