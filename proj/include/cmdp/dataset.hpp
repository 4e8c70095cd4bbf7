/**
 * @file dataset.hpp
 * @brief Logged offline datasets: sampling, JSONL serialization, validation.
 *
 * A dataset file is JSON Lines. The first line is a header object
 *
 *   {"kind":"cmdp-dataset","format":1,"instance":"BD-2","mode":"backdoor",
 *    "episodes":n,"horizon":H,"seed":12345,"rng":"xoshiro256**"}
 *
 * followed by one object per logged step, in episode-major step order:
 *
 *   {"ep":0,"h":0,"s":1,"a":0,"o":1,"r":0.3,"sp":0}
 *
 * "o" is the observed confounder class (backdoor) or the realized mediator
 * (frontdoor). The reader enforces the header contract, strict (ep, h)
 * ordering, and per-field ranges against the instance it is paired with.
 */
#ifndef CMDP_DATASET_HPP
#define CMDP_DATASET_HPP

#include <fstream>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/mdp.hpp"
#include "cmdp/rng.hpp"
#include "json.hpp"

namespace cmdp {

struct DatasetHeader {
  std::string instance;
  AdjustMode mode = AdjustMode::backdoor;
  int episodes = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
};

/// Seed for the offline logging stream of (instance, seed). Kept separate
/// from the online run stream so the same seed can drive both without reuse.
inline std::uint64_t dataset_seed(const std::string& instance, std::uint64_t seed) {
  return mix_seed(mix_seed(hash_str(instance.c_str()), seed), hash_str("offline-log"));
}

/// Draw n logged episodes under the behavior policy.
inline std::vector<Trajectory> sample_dataset(const ConfoundedMDP& m, int n,
                                              std::uint64_t seed) {
  if (n < 0) throw ValidationError("sample_dataset: negative episode count");
  Xoshiro256ss rng(dataset_seed(m.name, seed));
  std::vector<Trajectory> out;
  out.reserve(static_cast<size_t>(n));
  for (int e = 0; e < n; ++e) out.push_back(sample_offline_episode(m, rng));
  return out;
}

inline void write_dataset(std::ostream& os, const ConfoundedMDP& m,
                          const std::vector<Trajectory>& data, std::uint64_t seed) {
  nlohmann::ordered_json hdr;
  hdr["kind"] = "cmdp-dataset";
  hdr["format"] = 1;
  hdr["instance"] = m.name;
  hdr["mode"] = to_string(m.mode);
  hdr["episodes"] = data.size();
  hdr["horizon"] = m.H;
  hdr["seed"] = seed;
  hdr["rng"] = Xoshiro256ss::name;
  os << hdr.dump() << "\n";
  for (size_t e = 0; e < data.size(); ++e) {
    if (static_cast<int>(data[e].steps.size()) != m.H)
      throw ValidationError("write_dataset: episode " + std::to_string(e) +
                            " has wrong length");
    for (int h = 0; h < m.H; ++h) {
      const Step& st = data[e].steps[h];
      nlohmann::ordered_json row;
      row["ep"] = e;
      row["h"] = h;
      row["s"] = st.s;
      row["a"] = st.a;
      row["o"] = st.o;
      row["r"] = st.r;
      row["sp"] = st.sp;
      os << row.dump() << "\n";
    }
  }
}

inline void write_dataset_file(const std::string& path, const ConfoundedMDP& m,
                               const std::vector<Trajectory>& data, std::uint64_t seed) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open dataset file for writing: " + path);
  write_dataset(os, m, data, seed);
  if (!os) throw IoError("failed while writing dataset file: " + path);
}

namespace ds_detail {

inline int get_int(const nlohmann::json& j, const char* key, int line) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ValidationError("dataset line " + std::to_string(line) +
                          ": missing integer field '" + key + "'");
  return j[key].get<int>();
}

inline void check_range(int v, int lo, int hi, const char* what, int line) {
  if (v < lo || v >= hi)
    throw ValidationError("dataset line " + std::to_string(line) + ": field '" +
                          std::string(what) + "' = " + std::to_string(v) +
                          " out of range [0," + std::to_string(hi) + ")");
}

}  // namespace ds_detail

/// Read and validate a dataset against the instance it claims to log.
inline std::vector<Trajectory> read_dataset(std::istream& in, const ConfoundedMDP& m,
                                            DatasetHeader* header_out = nullptr) {
  using nlohmann::json;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ValidationError("dataset: empty stream, no header");
  ++line_no;
  json hdr = json::parse(line, nullptr, false);
  if (hdr.is_discarded() || !hdr.is_object())
    throw ValidationError("dataset line 1: header is not a JSON object");
  if (!hdr.contains("kind") || hdr["kind"] != "cmdp-dataset")
    throw ValidationError("dataset line 1: kind is not 'cmdp-dataset'");
  if (!hdr.contains("format") || hdr["format"] != 1)
    throw ValidationError("dataset line 1: unsupported format");
  DatasetHeader h;
  h.instance = hdr.value("instance", "");
  h.mode = adjust_mode_from_string(hdr.value("mode", ""));
  h.episodes = hdr.value("episodes", -1);
  h.horizon = hdr.value("horizon", -1);
  h.seed = hdr.value("seed", std::uint64_t{0});
  if (h.instance != m.name)
    throw ValidationError("dataset header instance '" + h.instance +
                          "' does not match instance '" + m.name + "'");
  if (h.mode != m.mode) throw ValidationError("dataset header mode does not match instance");
  if (h.horizon != m.H) throw ValidationError("dataset header horizon does not match instance");
  if (h.episodes < 0) throw ValidationError("dataset header: missing episode count");
  if (header_out) *header_out = h;

  std::vector<Trajectory> data(static_cast<size_t>(h.episodes));
  for (auto& t : data) t.steps.resize(m.H);
  int expect_ep = 0, expect_h = 0;
  const int o_hi = m.backdoor() ? m.nU : m.nM;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object())
      throw ValidationError("dataset line " + std::to_string(line_no) + ": not a JSON object");
    const int ep = ds_detail::get_int(row, "ep", line_no);
    const int hh = ds_detail::get_int(row, "h", line_no);
    if (expect_ep >= h.episodes)
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": more rows than the header announced");
    if (ep != expect_ep || hh != expect_h)
      throw ValidationError("dataset line " + std::to_string(line_no) + ": expected (ep,h)=(" +
                            std::to_string(expect_ep) + "," + std::to_string(expect_h) +
                            "), found (" + std::to_string(ep) + "," + std::to_string(hh) + ")");
    Step& st = data[static_cast<size_t>(ep)].steps[hh];
    st.s = ds_detail::get_int(row, "s", line_no);
    st.a = ds_detail::get_int(row, "a", line_no);
    st.o = ds_detail::get_int(row, "o", line_no);
    st.sp = ds_detail::get_int(row, "sp", line_no);
    if (!row.contains("r") || !row["r"].is_number())
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": missing numeric field 'r'");
    st.r = row["r"].get<double>();
    ds_detail::check_range(st.s, 0, m.nS, "s", line_no);
    ds_detail::check_range(st.a, 0, m.nA, "a", line_no);
    ds_detail::check_range(st.o, 0, o_hi, "o", line_no);
    ds_detail::check_range(st.sp, 0, m.nS, "sp", line_no);
    if (!(st.r >= 0.0 && st.r <= 1.0))
      throw ValidationError("dataset line " + std::to_string(line_no) +
                            ": reward outside [0,1]");
    if (++expect_h == m.H) {
      expect_h = 0;
      ++expect_ep;
    }
  }
  if (expect_ep != h.episodes || expect_h != 0)
    throw ValidationError("dataset: ended at (ep,h)=(" + std::to_string(expect_ep) + "," +
                          std::to_string(expect_h) + "), header announced " +
                          std::to_string(h.episodes) + " episodes");
  return data;
}

inline std::vector<Trajectory> read_dataset_file(const std::string& path,
                                                 const ConfoundedMDP& m,
                                                 DatasetHeader* header_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return read_dataset(in, m, header_out);
}

}  // namespace cmdp

#endif  // CMDP_DATASET_HPP
