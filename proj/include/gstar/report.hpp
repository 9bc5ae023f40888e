#pragma once

#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gstar/star_algebra.hpp"

namespace gstar {

inline std::string fnv1a_digest(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << "fnv1a:" << std::hex << h;
  return os.str();
}

struct CheckResult {
  std::string check;
  bool pass = false;
  std::string witness;  // filled on failure (or informative value on pass)
  std::string value;
};

/// Pipeline output: per-check verdicts, block tables and timing.  Serializes
/// to JSON and to CSV with columns check, verdict, witness, value.
struct Report {
  std::string pipeline;
  std::string input_digest;
  std::uint64_t seed = 0;
  double tolerance = 0;
  std::vector<CheckResult> checks;
  std::vector<std::pair<int, int>> blocks;  // (d, m)
  double timing_ms = 0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void add(const std::string& name, bool pass, const std::string& witness = "",
           const std::string& value = "") {
    checks.push_back({name, pass, witness, value});
  }

  void add_blocks(const BlockDecomposition& b) {
    for (const auto& blk : b.blocks) blocks.emplace_back(blk.d, blk.m);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["pipeline"] = pipeline;
    j["input_digest"] = input_digest;
    j["seed"] = seed;
    j["tolerance"] = tolerance;
    j["timing_ms"] = timing_ms;
    j["pass"] = all_pass();
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json e;
      e["check"] = c.check;
      e["verdict"] = c.pass ? "pass" : "fail";
      e["witness"] = c.witness;
      e["value"] = c.value;
      cs.push_back(std::move(e));
    }
    j["checks"] = std::move(cs);
    nlohmann::json bs = nlohmann::json::array();
    for (auto [d, m] : blocks) bs.push_back(nlohmann::json{{"d", d}, {"m", m}});
    j["blocks"] = std::move(bs);
    return j;
  }

  std::string to_csv() const {
    std::ostringstream os;
    auto esc = [](const std::string& s) {
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
      }
      return out + "\"";
    };
    os << "check,verdict,witness,value\n";
    for (const auto& c : checks)
      os << esc(c.check) << "," << (c.pass ? "pass" : "fail") << "," << esc(c.witness) << ","
         << esc(c.value) << "\n";
    for (auto [d, m] : blocks)
      os << "\"block\",\"info\",\"\",\"d=" << d << ";m=" << m << "\"\n";
    return os.str();
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace gstar
