#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lfa/dataset.hpp"
#include "lfa/optimize.hpp"

namespace lfa {

// Everything needed to reproduce one training run. Serialized as JSON next
// to the run outputs; replaying the file reproduces them.
struct RunManifest {
  std::string dataset;
  std::string name;  // report label; defaults to the dataset file stem
  Delimiter delimiter = Delimiter::Auto;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
  std::string output_dir;
  TrainConfig train;
};

std::string_view delimiter_name(Delimiter d);
std::optional<Delimiter> parse_delimiter(std::string_view name);

// File stem used as the default dataset label.
std::string dataset_stem(const std::string& path);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace lfa
