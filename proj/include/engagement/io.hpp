#ifndef ENGAGEMENT_IO_HPP_
#define ENGAGEMENT_IO_HPP_

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engagement/csv.hpp"
#include "engagement/dynamics.hpp"
#include "engagement/error.hpp"
#include "engagement/numeric.hpp"
#include "engagement/population.hpp"
#include "engagement/strategy.hpp"

namespace engagement {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Users file: header f0,...,f{d-1}; one row per user.

inline void WritePopulationCsv(std::ostream& out, const UserPopulation& users) {
  for (std::size_t f = 0; f < users.dim(); ++f) out << (f ? "," : "") << 'f' << f;
  out << '\n';
  for (std::size_t k = 0; k < users.num_users(); ++k) {
    const auto row = users.row(k);
    for (std::size_t f = 0; f < users.dim(); ++f) {
      out << (f ? "," : "") << FormatDouble(row[f]);
    }
    out << '\n';
  }
}

inline void SavePopulation(const std::string& path, const UserPopulation& users) {
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write users file " + path);
  WritePopulationCsv(out, users);
  Require(out.good(), ErrorCode::kIo, "failed writing users file " + path);
}

inline UserPopulation ReadPopulationCsv(std::istream& in, const std::string& name) {
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "users file " + name + " is empty");
  const auto header = csv::SplitLine(line);
  const std::size_t dim = header.size();
  for (std::size_t f = 0; f < dim; ++f) {
    Require(Trim(header[f]) == "f" + std::to_string(f), ErrorCode::kParse,
            name + ": header column " + std::to_string(f) + " should be f" + std::to_string(f));
  }
  std::vector<double> weights;
  std::size_t rows = 0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    const auto fields = csv::SplitLine(line);
    const std::string where = name + ":" + std::to_string(line_number);
    Require(fields.size() == dim, ErrorCode::kParse,
            where + ": expected " + std::to_string(dim) + " values, got " +
                std::to_string(fields.size()));
    for (const auto& field : fields) {
      const auto value = ParseDouble(field);
      Require(value.has_value(), ErrorCode::kParse, where + ": cannot parse '" + field + "'");
      Require(*value >= 0.0, ErrorCode::kInvalidArgument,
              where + ": negative weight " + field);
      weights.push_back(*value);
    }
    ++rows;
  }
  Require(rows > 0, ErrorCode::kParse, "users file " + name + " has no rows");
  return UserPopulation::FromRows(rows, dim, std::move(weights));
}

inline UserPopulation LoadPopulation(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open users file " + path);
  return ReadPopulationCsv(in, path);
}

// ---------------------------------------------------------------------------
// Profile file: {"n":..,"d":..,"basis":[...]} or {"n":..,"d":..,"matrix":[[...],...]}.

inline Json ProfileToJson(const StrategyProfile& profile) {
  Json j;
  j["n"] = profile.num_producers();
  j["d"] = profile.dim();
  if (profile.is_basis()) {
    j["basis"] = profile.basis().features;
  } else {
    Json rows = Json::array();
    for (std::size_t i = 0; i < profile.num_producers(); ++i) rows.push_back(profile.Row(i));
    j["matrix"] = rows;
  }
  return j;
}

inline StrategyProfile ProfileFromJson(const Json& j) {
  try {
    Require(j.is_object(), ErrorCode::kParse, "profile must be a JSON object");
    const auto n = j.at("n").get<std::size_t>();
    const auto d = j.at("d").get<std::size_t>();
    if (j.contains("basis")) {
      auto features = j.at("basis").get<std::vector<std::size_t>>();
      Require(features.size() == n, ErrorCode::kDimensionMismatch,
              "profile declares n=" + std::to_string(n) + " but lists " +
                  std::to_string(features.size()) + " producers");
      return StrategyProfile::Basis(d, std::move(features));
    }
    Require(j.contains("matrix"), ErrorCode::kParse, "profile needs 'basis' or 'matrix'");
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    Require(rows.size() == n, ErrorCode::kDimensionMismatch,
            "profile declares n=" + std::to_string(n) + " but has " +
                std::to_string(rows.size()) + " rows");
    std::vector<double> values;
    for (const auto& row : rows) {
      Require(row.size() == d, ErrorCode::kDimensionMismatch,
              "profile row has " + std::to_string(row.size()) + " entries, expected " +
                  std::to_string(d));
      values.insert(values.end(), row.begin(), row.end());
    }
    return StrategyProfile::General(n, d, std::move(values));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed profile JSON: ") + e.what());
  }
}

inline StrategyProfile LoadProfile(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open profile file " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return ProfileFromJson(j);
}

// ---------------------------------------------------------------------------
// {"converged":bool,"iterations":int,"basis":[...],"trace":[[iter,producer,old,new],...]}

inline Json DynamicsResultToJson(const DynamicsResult& result) {
  Json trace = Json::array();
  for (const auto& e : result.trace) {
    trace.push_back({e.iteration, e.producer, e.old_feature, e.new_feature});
  }
  Json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["basis"] = result.profile.features;
  j["trace"] = std::move(trace);
  return j;
}

inline DynamicsResult DynamicsResultFromJson(const Json& j, std::size_t dim) {
  try {
    DynamicsResult result;
    result.converged = j.at("converged").get<bool>();
    result.iterations = j.at("iterations").get<std::size_t>();
    result.profile.dim = dim;
    result.profile.features = j.at("basis").get<std::vector<std::size_t>>();
    for (const auto& event : j.at("trace")) {
      const auto v = event.get<std::vector<std::size_t>>();
      Require(v.size() == 4, ErrorCode::kParse, "trace events have 4 fields");
      result.trace.push_back({v[0], v[1], v[2], v[3], 0.0, 0.0});
    }
    return result;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed dynamics result: ") + e.what());
  }
}

}  // namespace engagement

#endif  // ENGAGEMENT_IO_HPP_
