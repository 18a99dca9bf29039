#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "hsr/synth.hpp"
#include "hsr/trainer.hpp"

namespace hsr {

struct ConfigParseError : Error { using Error::Error; };
struct UnknownKeyError : ConfigParseError { using ConfigParseError::ConfigParseError; };
struct ConfigTypeError : ConfigParseError { using ConfigParseError::ConfigParseError; };

// Every tunable in one flat namespace. Values mirror the published
// hyperparameters where they exist; the rest are artifact defaults.
struct RunConfig {
  TrainConfig train;
  SynthConfig synth;

  TrainConfig train_config() const { return train; }
  SynthConfig synth_config(std::uint64_t seed_override) const {
    SynthConfig s = synth;
    s.seed = seed_override;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, int line) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  std::from_chars_result r{};
  if constexpr (std::is_floating_point_v<T>)
    r = std::from_chars(first, last, out, std::chars_format::general);
  else
    r = std::from_chars(first, last, out);
  if (r.ec != std::errc{} || r.ptr != last)
    throw ConfigTypeError("line " + std::to_string(line) + ": value for key '" + key +
                          "' is not a valid number: '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigTypeError("line " + std::to_string(line) + ": value for key '" + key +
                        "' is not a boolean: '" + value + "'");
}

}  // namespace detail

// `key = value` lines with `#` comments. Unknown keys are rejected; omitted
// keys keep their defaults.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigParseError("line " + std::to_string(line_no) + ": empty key or value");

    using detail::parse_bool;
    using detail::parse_number;
    if (key == "K") {
      cfg.train.icm_k = parse_number<int>(key, value, line_no);
    } else if (key == "min_pts") {
      cfg.train.min_pts = parse_number<int>(key, value, line_no);
    } else if (key == "eps") {
      cfg.train.eps = value == "auto" ? 0.0 : parse_number<double>(key, value, line_no);
    } else if (key == "lambda") {
      if (value == "auto") {
        cfg.train.lambda_auto = true;
      } else {
        cfg.train.lambda_auto = false;
        cfg.train.fixed_lambda = parse_number<double>(key, value, line_no);
      }
    } else if (key == "margin") {
      cfg.train.margin = parse_number<double>(key, value, line_no);
    } else if (key == "lr") {
      cfg.train.lr = parse_number<double>(key, value, line_no);
    } else if (key == "epochs_per_iter") {
      cfg.train.epochs_per_iter = parse_number<int>(key, value, line_no);
    } else if (key == "iterations") {
      cfg.train.iterations = parse_number<int>(key, value, line_no);
    } else if (key == "P_ids") {
      cfg.train.p_ids = parse_number<int>(key, value, line_no);
    } else if (key == "K_imgs") {
      cfg.train.k_imgs = parse_number<int>(key, value, line_no);
    } else if (key == "D_out") {
      cfg.train.d_out = parse_number<int>(key, value, line_no);
    } else if (key == "use_icm") {
      cfg.train.use_icm = parse_bool(key, value, line_no);
    } else if (key == "use_pbh") {
      cfg.train.use_pbh = parse_bool(key, value, line_no);
    } else if (key == "seed") {
      cfg.train.seed = parse_number<std::uint64_t>(key, value, line_no);
      cfg.synth.seed = cfg.train.seed;
    } else if (key == "logit_scale") {
      cfg.train.logit_scale = parse_number<double>(key, value, line_no);
    } else if (key == "icm_per_anchor") {
      cfg.train.icm_per_anchor = parse_number<int>(key, value, line_no);
    } else if (key == "min_cluster_size_for_split") {
      cfg.train.min_cluster_size_for_split = parse_number<int>(key, value, line_no);
    } else if (key == "triplet_variant") {
      if (value == "batch_hard")
        cfg.train.triplet_variant = TripletVariant::kBatchHard;
      else if (value == "all_pairs")
        cfg.train.triplet_variant = TripletVariant::kAllPairs;
      else
        throw ConfigTypeError("line " + std::to_string(line_no) +
                              ": triplet_variant must be batch_hard or all_pairs");
    } else if (key == "icm_negative_mode") {
      if (value == "uniform")
        cfg.train.icm_negative_mode = IcmNegativeMode::kUniform;
      else if (value == "batch_hard")
        cfg.train.icm_negative_mode = IcmNegativeMode::kBatchHard;
      else
        throw ConfigTypeError("line " + std::to_string(line_no) +
                              ": icm_negative_mode must be uniform or batch_hard");
    } else if (key == "num_ids") {
      cfg.synth.num_ids = parse_number<int>(key, value, line_no);
    } else if (key == "cams") {
      cfg.synth.cams = parse_number<int>(key, value, line_no);
    } else if (key == "samples_per_id_per_cam") {
      cfg.synth.samples_per_id_per_cam = parse_number<int>(key, value, line_no);
    } else if (key == "D_part") {
      cfg.synth.d_part = parse_number<int>(key, value, line_no);
    } else if (key == "sigma_id") {
      cfg.synth.sigma_id = parse_number<double>(key, value, line_no);
    } else if (key == "alpha_cam") {
      cfg.synth.alpha_cam = parse_number<double>(key, value, line_no);
    } else if (key == "twin_fraction") {
      cfg.synth.twin_fraction = parse_number<double>(key, value, line_no);
    } else if (key == "noise_sigma") {
      cfg.synth.noise_sigma = parse_number<double>(key, value, line_no);
    } else {
      throw UnknownKeyError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace hsr
