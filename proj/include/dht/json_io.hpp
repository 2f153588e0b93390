#ifndef DHT_JSON_IO_HPP_
#define DHT_JSON_IO_HPP_

#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dht/encoding.hpp"
#include "dht/exponent_region.hpp"
#include "dht/prob.hpp"
#include "dht/simplex_grid.hpp"

namespace dht {

using nlohmann::json;

// {"P0": [[...]], "P1": [[...]]} with matching shapes.
inline HypothesisPair hypothesis_pair_from_json(const json& j) {
  if (!j.contains("P0") || !j.contains("P1"))
    throw std::invalid_argument("hypothesis pair JSON: need P0 and P1");
  auto parse_matrix = [](const json& m) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : m) rows.push_back(r.get<std::vector<double>>());
    return JointDistribution(rows);
  };
  return HypothesisPair(parse_matrix(j.at("P0")), parse_matrix(j.at("P1")));
}

inline HypothesisPair load_hypothesis_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hypothesis file: " + path);
  json j;
  in >> j;
  return hypothesis_pair_from_json(j);
}

inline json hypothesis_pair_to_json(const HypothesisPair& h) {
  auto matrix = [](const JointDistribution& p) {
    json rows = json::array();
    for (int x = 0; x < p.nx; ++x) {
      json row = json::array();
      for (int y = 0; y < p.ny; ++y) row.push_back(p.at(x, y));
      rows.push_back(row);
    }
    return rows;
  };
  return json{{"P0", matrix(h.p0)}, {"P1", matrix(h.p1)}};
}

// Run-length encoded mask over the row-major (x-index, y-index) product.
inline json grid_set_to_rle_json(const GridSet& s) {
  json runs = json::array();
  size_t z = 0;
  const auto& mask = s.mask;
  while (z < mask.size()) {
    if (!mask[z]) {
      ++z;
      continue;
    }
    size_t start = z;
    while (z < mask.size() && mask[z]) ++z;
    runs.push_back(json::array({start, z - start}));
  }
  return json{{"nx", s.nx()}, {"ny", s.ny()}, {"runs", runs}};
}

inline GridSet grid_set_from_rle_json(const json& j, const SimplexGrid& gx,
                                      const SimplexGrid& gy) {
  GridSet s(gx, gy);
  if (j.at("nx").get<int>() != s.nx() || j.at("ny").get<int>() != s.ny())
    throw std::invalid_argument("grid set RLE: shape mismatch with grids");
  for (const auto& run : j.at("runs")) {
    size_t start = run.at(0).get<size_t>();
    size_t len = run.at(1).get<size_t>();
    if (start + len > s.mask.size()) throw std::invalid_argument("grid set RLE: run out of range");
    for (size_t z = start; z < start + len; ++z) s.mask[z] = 1;
  }
  return s;
}

// Config echo written as comment headers so every CSV is reproducible.
inline void write_csv_header(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& config) {
  for (const auto& [k, v] : config) os << "# " << k << "=" << v << "\n";
}

inline void write_boundary_csv(std::ostream& os, const RegionBoundary& b,
                               const std::vector<std::pair<std::string, std::string>>& config,
                               double unit_scale = 1.0) {
  write_csv_header(os, config);
  os << "e0_nats,e1_nats,constraint,method,uncertainty\n";
  for (const auto& [e0, e1] : b.points)
    os << e0 * unit_scale << "," << e1 * unit_scale << "," << b.constraint << "," << b.method
       << "," << b.uncertainty * unit_scale << "\n";
}

inline void write_encoder_csv(std::ostream& os, const TypeEncoder& enc,
                              const std::vector<std::pair<std::string, std::string>>& config) {
  write_csv_header(os, config);
  const int dim = enc.grid->dim;
  for (int z = 0; z < dim; ++z) os << "q" << z << ",";
  os << "symbol\n";
  for (int i = 0; i < enc.grid->size(); ++i) {
    const Distribution& q = enc.grid->points[static_cast<size_t>(i)];
    for (int z = 0; z < dim; ++z) os << q[z] << ",";
    os << enc.levels[static_cast<size_t>(i)] << "\n";
  }
}

inline json encoder_to_json(const TypeEncoder& enc) {
  json chain = json::array();
  for (const auto& level : enc.chain) {
    json runs = json::array();
    size_t z = 0;
    while (z < level.size()) {
      if (!level[z]) {
        ++z;
        continue;
      }
      size_t start = z;
      while (z < level.size() && level[z]) ++z;
      runs.push_back(json::array({start, z - start}));
    }
    chain.push_back(runs);
  }
  return json{{"dim", enc.grid->dim},
              {"resolution", enc.grid->resolution},
              {"m", enc.m},
              {"symbol_count", enc.symbol_count},
              {"variant", to_string(enc.variant)},
              {"extra_symbol", enc.extra_symbol},
              {"levels", enc.levels},
              {"chain_rle", chain}};
}

inline TypeEncoder encoder_from_json(const json& j) {
  TypeEncoder enc;
  auto grid = std::make_shared<SimplexGrid>(j.at("dim").get<int>(), j.at("resolution").get<int>());
  enc.grid = grid;
  enc.m = j.at("m").get<int>();
  enc.symbol_count = j.at("symbol_count").get<int>();
  enc.extra_symbol = j.at("extra_symbol").get<bool>();
  std::string v = j.at("variant").get<std::string>();
  enc.variant = v == "psi_bar" ? DecoderVariant::psi_bar
                               : (v == "psi_asym" ? DecoderVariant::psi_asym : DecoderVariant::psi);
  enc.levels = j.at("levels").get<std::vector<int>>();
  if (static_cast<int>(enc.levels.size()) != grid->size())
    throw std::invalid_argument("encoder JSON: level table does not match the grid");
  for (const auto& level_runs : j.at("chain_rle")) {
    std::vector<std::uint8_t> mask(static_cast<size_t>(grid->size()), 0);
    for (const auto& run : level_runs) {
      size_t start = run.at(0).get<size_t>();
      size_t len = run.at(1).get<size_t>();
      if (start + len > mask.size()) throw std::invalid_argument("encoder JSON: run out of range");
      for (size_t z = start; z < start + len; ++z) mask[z] = 1;
    }
    enc.chain.push_back(std::move(mask));
  }
  if (static_cast<int>(enc.chain.size()) != enc.m)
    throw std::invalid_argument("encoder JSON: chain does not have M levels");
  return enc;
}

}  // namespace dht

#endif  // DHT_JSON_IO_HPP_
