#pragma once

#include <deflab/arbitrage.hpp>
#include <deflab/deflator.hpp>
#include <deflab/kunita_yoeurp.hpp>
#include <deflab/montecarlo.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>

namespace deflab::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

struct Config {
  std::string command;
  std::uint64_t seed = 20240601;
  std::string seed_source = "default";
  unsigned threads = 1;
  std::size_t paths = 100000;
  int steps = 512;
  double threshold = 3.0;
  std::string pivot = "bland";
  long n_sum = 1000000;
  std::string report;

  std::string tree;
  std::string price = "S";
  std::string deflator = "Z";
  std::string out;
  std::string name = "Z";
  std::string label_map;
  std::string event;
  std::string scenario;
  std::string params;
  std::string csv;
  std::string dir = ".";
  bool na = false;
  bool na1 = false;
  bool both = false;
  bool normalize = false;
  bool list = false;
  std::size_t trials = 16;
  int stopping_times = 10;
  int supermartingales = 50;
  long utility_terms = 0;

  Json to_json() const;
};

Json rational(const Rational& x);
Json vector_json(const RationalVector& v);
Json process_json(const EventTree& tree, const AdaptedProcess& X);
Json strategy_json(const EventTree& tree, const Strategy& H);
Json arbitrage_json(const EventTree& tree, const ArbitrageReport& r);
Json deflation_json(const EventTree& tree, const DeflationReport& r);
Json ky_json(const KyReport& r);
Json test_json(const mc::MartingaleTest& t);

}  // namespace deflab::cli
