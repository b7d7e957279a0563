#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdm/energy.hpp"
#include "mdm/geom.hpp"

namespace mdm {

// Deterministic sample generators. The seed is recorded for provenance even
// though the built-in shapes are seed-free.
struct GeneratorSpec {
    std::string shape;  // circle | polygon | segment_pair | grid
    std::map<std::string, double> params;
    int sample_count = 1;
    std::uint64_t seed = 0;
};

struct InstanceFile {
    int version = 1;
    double r = 0.0;
    std::vector<Point2> points;
    std::optional<GeneratorSpec> generator;

    CompactSample sample() const { return {points, r}; }
    std::string to_json_string() const;
    static InstanceFile from_json_string(const std::string& text);
};

// circle: equiangular on radius R. polygon: arc-length uniform boundary of
// the regular k-gon with the given side, axis-aligned for k=4.
// segment_pair: the two points (0,0), (d,0). grid: nx-by-ny lattice with the
// given spacing, centered at the origin. Unknown shape or bad parameters
// throw std::invalid_argument.
InstanceFile generate_instance(const GeneratorSpec& spec, double r);

struct RunManifest {
    std::string tool_version;
    std::string command;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::map<std::string, std::string> input_hashes;   // path -> fnv64 hex
    std::map<std::string, std::string> output_hashes;

    std::string to_json_string() const;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);   // throws std::runtime_error
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mdm
