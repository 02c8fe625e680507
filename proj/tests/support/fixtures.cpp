#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace fixtures {

using namespace rdsnet;

RdsDataset build_forest(const ForestShape& shape, const std::string& outcome) {
    struct Node {
        int status;
        int recruits = 0;
    };
    std::vector<Node> nodes;
    std::vector<ParticipantRecord> records;
    auto add = [&](int status, std::optional<std::size_t> recruiter) {
        ParticipantRecord r;
        r.id = "c" + std::to_string(records.size() + 1);
        if (recruiter) r.recruiter_id = records[*recruiter].id;
        r.degree = shape.degree;
        if (status != 2) r.outcome = status;
        records.push_back(std::move(r));
        nodes.push_back({status});
    };
    for (int s = 0; s < 3; ++s)
        for (int k = 0; k < shape.seeds[s]; ++k) add(s, std::nullopt);

    auto pending = shape.dyads;
    std::size_t cursor[3] = {0, 0, 0};
    for (bool progress = true; progress;) {
        progress = false;
        for (int from = 0; from < 3; ++from) {
            for (int to = 0; to < 3; ++to) {
                while (pending[from][to] > 0) {
                    std::size_t& c = cursor[from];
                    while (c < nodes.size() && (nodes[c].status != from || nodes[c].recruits >= shape.max_recruits))
                        ++c;
                    if (c == nodes.size()) {
                        c = 0;
                        break;
                    }
                    ++nodes[c].recruits;
                    add(to, c);
                    --pending[from][to];
                    progress = true;
                }
            }
        }
    }
    for (const auto& row : pending)
        for (int v : row)
            if (v != 0) throw std::logic_error("forest shape is not realizable");
    return RdsDataset(std::move(records), outcome, {});
}

ForestShape hiv_shape() {
    ForestShape s;
    s.seeds = {25, 3, 2};
    s.dyads[0] = {478, 33, 30};
    s.dyads[1] = {27, 10, 5};
    s.dyads[2] = {42, 3, 0};
    return s;
}

ForestShape syphilis_shape() {
    ForestShape s;
    s.seeds = {24, 6, 0};
    s.dyads[0] = {481, 70, 9};
    s.dyads[1] = {49, 19, 0};
    return s;
}

ForestShape syphilis_prevalence_shape() {
    ForestShape s;
    s.seeds = {27, 3, 0};
    s.dyads[0] = {500, 50, 0};
    s.dyads[1] = {55, 23, 0};
    return s;
}

std::string to_csv(const RdsDataset& ds) {
    std::ostringstream out;
    write_csv(ds, out);
    return out.str();
}

RdsDataset from_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in).dataset;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rdsnet-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
