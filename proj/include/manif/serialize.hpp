#ifndef MANIF_SERIALIZE_HPP
#define MANIF_SERIALIZE_HPP

#include <cstdint>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/param_vector.hpp"
#include "manif/split.hpp"
#include "manif/unlearn.hpp"

namespace manif {

using nlohmann::json;

// ---- encoder spec <-> JSON -------------------------------------------------

inline json to_json(const EncoderSpec& spec) {
  json j;
  j["layers"] = spec.layers;
  std::vector<std::string> acts;
  for (Activation a : spec.activations) acts.push_back(to_string(a));
  j["activations"] = acts;
  j["head"] = spec.head;
  return j;
}

inline EncoderSpec encoder_from_json(const json& j) {
  EncoderSpec spec;
  try {
    spec.layers = j.at("layers").get<std::vector<int>>();
    for (const auto& s : j.at("activations"))
      spec.activations.push_back(activation_from_string(s.get<std::string>()));
    spec.head = j.value("head", false);
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Code::bad_value,
                      std::string("encoder json: ") + e.what());
  }
  spec.validate();
  return spec;
}

// ---- unlearning split <-> JSON (index lists + seed + k) --------------------

inline json to_json(const UnlearnSplit& s) {
  json j;
  j["k"] = s.k;
  j["seed"] = s.seed;
  j["balanced"] = s.balanced;
  j["erased"] = s.erased;
  j["retained"] = s.retained;
  json nbrs = json::object();
  for (const auto& [e, v] : s.neighbor_sets) nbrs[std::to_string(e)] = v;
  j["neighbor_sets"] = nbrs;
  j["neighbor_union"] = s.neighbor_union;
  return j;
}

// Rebuilds a serialized split, recomputing the cached original
// representations under the given original parameters.
inline UnlearnSplit split_from_json(const json& j, const Dataset& data,
                                    const EncoderSpec& spec,
                                    const ParamVector& params_o) {
  UnlearnSplit s;
  try {
    s.k = j.at("k").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.balanced = j.value("balanced", false);
    s.erased = j.at("erased").get<std::vector<int>>();
    s.retained = j.at("retained").get<std::vector<int>>();
    for (const auto& [key, v] : j.at("neighbor_sets").items())
      s.neighbor_sets[std::stoi(key)] = v.get<std::vector<int>>();
    s.neighbor_union = j.at("neighbor_union").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Code::bad_value,
                      std::string("split json: ") + e.what());
  }
  for (int e : s.erased)
    s.original_reps.emplace(
        e, forward(spec, params_o, data.inputs[e]).representation);
  s.validate(data.size());
  return s;
}

// ---- parameter files: u64 little-endian length, then f64 little-endian ----

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void save_params(const std::string& path, const ParamVector& params) {
  std::string buf;
  buf.reserve(8 + 8 * params.size());
  detail::put_u64_le(buf, params.size());
  for (double x : params) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, 8);
    detail::put_u64_le(buf, bits);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot write " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline ParamVector load_params(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot open " + path);
  std::vector<unsigned char> buf{std::istreambuf_iterator<char>(f),
                                 std::istreambuf_iterator<char>()};
  if (buf.size() < 8)
    throw FormatError(FormatError::Code::truncated, path + ": header truncated");
  std::uint64_t n = detail::get_u64_le(&buf[0]);
  if (buf.size() != 8 + 8 * n)
    throw FormatError(FormatError::Code::truncated, path + ": data truncated");
  ParamVector params(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t bits = detail::get_u64_le(&buf[8 + 8 * i]);
    double x;
    std::memcpy(&x, &bits, 8);
    params[i] = x;
  }
  return params;
}

// ---- unlearning config <-> JSON --------------------------------------------

inline json to_json(const UnlearnConfig& c) {
  json j;
  j["k"] = c.k;
  j["t_star"] = c.t_star;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["path_lr"] = c.path_lr;
  j["path_steps_per_epoch"] = c.path_steps_per_epoch;
  j["batch_size"] = c.batch_size;
  j["path_batch_size"] = c.path_batch_size;
  j["distance"] = to_string(c.distance);
  j["margin_mode"] = to_string(c.margin_mode);
  j["fixed_margin"] = c.fixed_margin;
  j["path_loss"] = to_string(c.path_loss);
  j["w_init"] = c.w_init == WInit::theta_o ? "theta_o" : "theta_u";
  j["seed"] = c.seed;
  return j;
}

inline UnlearnConfig unlearn_config_from_json(const json& j) {
  UnlearnConfig c;
  try {
    c.k = j.value("k", c.k);
    c.t_star = j.value("t_star", c.t_star);
    c.epochs = j.value("epochs", c.epochs);
    c.lr = j.value("lr", c.lr);
    c.path_lr = j.value("path_lr", c.path_lr);
    c.path_steps_per_epoch = j.value("path_steps_per_epoch", c.path_steps_per_epoch);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.path_batch_size = j.value("path_batch_size", c.path_batch_size);
    if (j.contains("distance"))
      c.distance = metric_from_string(j.at("distance").get<std::string>());
    if (j.contains("margin_mode"))
      c.margin_mode = margin_mode_from_string(j.at("margin_mode").get<std::string>());
    c.fixed_margin = j.value("fixed_margin", c.fixed_margin);
    if (j.contains("path_loss"))
      c.path_loss = path_loss_from_string(j.at("path_loss").get<std::string>());
    if (j.contains("w_init")) {
      std::string w = j.at("w_init").get<std::string>();
      if (w == "theta_o") c.w_init = WInit::theta_o;
      else if (w == "theta_u") c.w_init = WInit::theta_u;
      else throw ConfigError("unknown w_init: " + w);
    }
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Code::bad_value,
                      std::string("unlearn config json: ") + e.what());
  }
  c.validate();
  return c;
}

inline json to_json(const UnlearnReport& r) {
  json j;
  j["rt_seconds"] = r.rt_seconds;
  j["triplet_trace"] = r.triplet_trace;
  j["path_trace"] = r.path_trace;
  j["margin_trace"] = r.margin_trace;
  j["param_count"] = r.theta_u.size();
  return j;
}

// ---- deterministic text formatting ------------------------------------------

// Shortest representation that round-trips a double; used for every CSV
// field so reruns are byte-identical.
inline std::string fmt_double(double v) {
  char buf[32];
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);  // integral: no exponent form
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
  }
  return buf;
}

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Code::bad_value,
                      path + ": " + std::string(e.what()));
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot write " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace manif

#endif
