#include "halluzig/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "halluzig/error.hpp"
#include "halluzig/parallel.hpp"

namespace halluzig {
namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw UsageError("empty element in list '" + text + "'");
    out.push_back(item.substr(first, last - first + 1));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

template <typename T>
T get_as(const json& value, const char* key, const std::string& source) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw UsageError(source + ": key '" + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  features.validate();
  if (n_trees == 0) throw UsageError("n_trees must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test_fraction must lie in (0, 1)");
}

std::vector<std::uint64_t> RunConfig::effective_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

std::size_t RunConfig::effective_workers() const { return workers > 0 ? workers : default_workers(); }

std::string config_to_json(const RunConfig& config, int indent) {
  nlohmann::ordered_json j;
  const auto& f = config.features;
  j["top_percent"] = f.top_percent;
  j["min_persistence"] = f.min_persistence;
  j["dims"] = f.dims;
  j["scheme"] = std::string(to_string(f.scheme));
  j["depth_fraction"] = f.depth_fraction;
  j["image_resolution"] = {f.image_rows, f.image_cols};
  j["sigma"] = f.sigma;
  j["betti_resolution"] = f.betti_resolution;
  j["n_trees"] = config.n_trees;
  j["max_depth"] = config.max_depth;
  j["seed"] = config.seed;
  j["seeds"] = config.seeds;
  j["test_fraction"] = config.test_fraction;
  return j.dump(indent);
}

void apply_config_json(RunConfig& config, const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError(source + ": top level must be an object");
  auto& f = config.features;
  for (const auto& [key, value] : doc.items()) {
    const char* k = key.c_str();
    if (key == "top_percent") {
      f.top_percent = get_as<double>(value, k, source);
    } else if (key == "min_persistence") {
      f.min_persistence = get_as<std::int64_t>(value, k, source);
    } else if (key == "dims") {
      if (value.is_string()) {
        f.dims = parse_dims(value.get<std::string>());
      } else {
        f.dims = get_as<std::vector<int>>(value, k, source);
      }
    } else if (key == "scheme") {
      f.scheme = parse_scheme(get_as<std::string>(value, k, source));
    } else if (key == "depth_fraction") {
      f.depth_fraction = get_as<double>(value, k, source);
    } else if (key == "image_resolution") {
      const auto res = get_as<std::vector<std::size_t>>(value, k, source);
      if (res.size() != 2) throw UsageError(source + ": image_resolution must be [rows, cols]");
      f.image_rows = res[0];
      f.image_cols = res[1];
    } else if (key == "sigma") {
      f.sigma = get_as<double>(value, k, source);
    } else if (key == "betti_resolution") {
      f.betti_resolution = get_as<std::size_t>(value, k, source);
    } else if (key == "n_trees") {
      config.n_trees = get_as<std::size_t>(value, k, source);
    } else if (key == "max_depth") {
      config.max_depth = get_as<std::size_t>(value, k, source);
    } else if (key == "seed") {
      config.seed = get_as<std::uint64_t>(value, k, source);
    } else if (key == "seeds") {
      config.seeds = get_as<std::vector<std::uint64_t>>(value, k, source);
    } else if (key == "test_fraction") {
      config.test_fraction = get_as<double>(value, k, source);
    } else if (key == "workers") {
      config.workers = get_as<std::size_t>(value, k, source);
    } else {
      throw UsageError(source + ": unknown key '" + key + "'");
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_json(config, buffer.str(), path.string());
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  for (const auto& item : split_list(text)) {
    if (item == "0") {
      dims.push_back(0);
    } else if (item == "1") {
      dims.push_back(1);
    } else {
      throw UsageError("dims must be drawn from {0, 1}, got '" + item + "'");
    }
  }
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  return dims;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(text)) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("'" + item + "' is not an unsigned integer seed");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_fraction_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError("'" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace halluzig
