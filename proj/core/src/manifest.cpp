#include "lfa/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lfa/errors.hpp"

namespace lfa {

namespace {

using nlohmann::json;

void put_optional(json& node, const char* key, const std::optional<double>& value) {
  if (value) node[key] = *value;
}

void get_optional(const json& node, const char* key, std::optional<double>& value) {
  if (node.contains(key)) value = node.at(key).get<double>();
}

}  // namespace

std::string_view delimiter_name(Delimiter d) {
  switch (d) {
    case Delimiter::Auto: return "auto";
    case Delimiter::Tab: return "tab";
    case Delimiter::Comma: return "comma";
    case Delimiter::Whitespace: return "space";
  }
  return "auto";
}

std::optional<Delimiter> parse_delimiter(std::string_view name) {
  if (name == "auto") return Delimiter::Auto;
  if (name == "tab") return Delimiter::Tab;
  if (name == "comma") return Delimiter::Comma;
  if (name == "space") return Delimiter::Whitespace;
  return std::nullopt;
}

std::string dataset_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::string manifest_to_json(const RunManifest& manifest) {
  const TrainConfig& t = manifest.train;
  json train{
      {"optimizer", std::string(optimizer_name(t.optimizer))},
      {"max_epochs", t.max_epochs},
      {"patience", t.patience},
      {"min_improvement", t.min_improvement},
      {"rank", t.rank},
      {"reg_strength", t.reg_strength},
      {"init_hi", t.init_hi},
      {"seed", t.seed},
      {"cg", {{"max_iterations", t.cg.max_iterations}, {"rel_tolerance", t.cg.rel_tolerance}}},
  };
  put_optional(train, "learning_rate", t.learning_rate);
  put_optional(train, "momentum", t.momentum);
  put_optional(train, "adam_beta1", t.adam_beta1);
  put_optional(train, "adam_beta2", t.adam_beta2);
  put_optional(train, "adam_epsilon", t.adam_epsilon);
  put_optional(train, "gamma", t.fixed_damping);
  put_optional(train, "cubic_m", t.cubic_m);

  json root{
      {"dataset", manifest.dataset},
      {"name", manifest.name},
      {"delimiter", std::string(delimiter_name(manifest.delimiter))},
      {"split_fraction", manifest.split_fraction},
      {"split_seed", manifest.split_seed},
      {"output_dir", manifest.output_dir},
      {"deterministic", t.deterministic},
      {"train", std::move(train)},
  };
  return root.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw DataError(std::string("manifest is not valid JSON: ") + err.what());
  }
  try {
    RunManifest m;
    m.dataset = root.at("dataset").get<std::string>();
    m.name = root.value("name", dataset_stem(m.dataset));
    const std::string delim = root.value("delimiter", std::string("auto"));
    const auto parsed_delim = parse_delimiter(delim);
    if (!parsed_delim) throw DataError("unknown delimiter '" + delim + "'");
    m.delimiter = *parsed_delim;
    m.split_fraction = root.value("split_fraction", 0.8);
    m.split_seed = root.value("split_seed", std::uint64_t{0});
    m.output_dir = root.value("output_dir", std::string{});

    const json& train = root.at("train");
    TrainConfig& t = m.train;
    const std::string opt_name = train.at("optimizer").get<std::string>();
    const auto opt = parse_optimizer(opt_name);
    if (!opt) throw DataError("unknown optimizer '" + opt_name + "'");
    t.optimizer = *opt;
    t.max_epochs = train.value("max_epochs", t.max_epochs);
    t.patience = train.value("patience", t.patience);
    t.min_improvement = train.value("min_improvement", t.min_improvement);
    t.rank = train.value("rank", t.rank);
    t.reg_strength = train.value("reg_strength", t.reg_strength);
    t.init_hi = train.value("init_hi", t.init_hi);
    t.seed = train.value("seed", t.seed);
    t.deterministic = root.value("deterministic", false);
    if (train.contains("cg")) {
      const json& cg = train.at("cg");
      t.cg.max_iterations = cg.value("max_iterations", t.cg.max_iterations);
      t.cg.rel_tolerance = cg.value("rel_tolerance", t.cg.rel_tolerance);
    }
    get_optional(train, "learning_rate", t.learning_rate);
    get_optional(train, "momentum", t.momentum);
    get_optional(train, "adam_beta1", t.adam_beta1);
    get_optional(train, "adam_beta2", t.adam_beta2);
    get_optional(train, "adam_epsilon", t.adam_epsilon);
    get_optional(train, "gamma", t.fixed_damping);
    get_optional(train, "cubic_m", t.cubic_m);
    return m;
  } catch (const json::exception& err) {
    throw DataError(std::string("manifest is missing required fields: ") + err.what());
  }
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << manifest_to_json(manifest);
}

}  // namespace lfa
