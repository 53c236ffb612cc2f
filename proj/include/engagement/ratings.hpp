#ifndef ENGAGEMENT_RATINGS_HPP_
#define ENGAGEMENT_RATINGS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "engagement/csv.hpp"
#include "engagement/error.hpp"
#include "engagement/numeric.hpp"

namespace engagement {

struct RatingsSchema {
  std::string user_column = "user";
  std::string item_column = "item";
  std::string rating_column = "rating";
  char delimiter = ',';
};

struct Rating {
  std::size_t user = 0;  // dense index into RatingsTable::user_ids
  std::size_t item = 0;  // dense index into RatingsTable::item_ids
  double value = 0.0;
};

// Sparse (user, item, rating) triples with dense contiguous indices.
class RatingsTable {
 public:
  // Later ratings of an already-seen (user, item) pair overwrite the earlier
  // one and are counted in duplicates().
  void Add(const std::string& user, const std::string& item, double value) {
    Require(std::isfinite(value) && value >= 0.0, ErrorCode::kInvalidArgument,
            "rating must be finite and non-negative");
    const std::size_t u = Intern(user, user_index_, user_ids_);
    const std::size_t i = Intern(item, item_index_, item_ids_);
    auto [it, inserted] = pair_index_.try_emplace(PairKey(u, i), ratings_.size());
    if (inserted) {
      ratings_.push_back({u, i, value});
    } else {
      ratings_[it->second].value = value;
      ++duplicates_;
    }
  }

  const std::vector<Rating>& ratings() const { return ratings_; }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  std::size_t duplicates() const { return duplicates_; }
  std::size_t rows_read() const { return rows_read_; }
  void set_rows_read(std::size_t rows) { rows_read_ = rows; }

 private:
  static std::size_t Intern(const std::string& id,
                            std::unordered_map<std::string, std::size_t>& index,
                            std::vector<std::string>& ids) {
    auto [it, inserted] = index.try_emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
  }

  static std::uint64_t PairKey(std::size_t user, std::size_t item) {
    return (static_cast<std::uint64_t>(user) << 32) ^ static_cast<std::uint64_t>(item);
  }

  std::vector<Rating> ratings_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::unordered_map<std::uint64_t, std::size_t> pair_index_;
  std::size_t duplicates_ = 0;
  std::size_t rows_read_ = 0;
};

// Reads a delimited ratings file with a header row naming the columns.
// Line numbers in errors are 1-based and count the header.
inline RatingsTable LoadRatingsCsv(const std::string& path, const RatingsSchema& schema = {}) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open ratings file " + path);
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "ratings file " + path + " is empty");
  const auto header = csv::SplitLine(line, schema.delimiter);
  auto column = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (Trim(header[c]) == name) return c;
    }
    throw Error(ErrorCode::kParse, "ratings file " + path + " has no column '" + name + "'");
  };
  const std::size_t user_col = column(schema.user_column);
  const std::size_t item_col = column(schema.item_column);
  const std::size_t rating_col = column(schema.rating_column);
  const std::size_t needed = std::max({user_col, item_col, rating_col}) + 1;

  RatingsTable table;
  std::size_t line_number = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    const auto fields = csv::SplitLine(line, schema.delimiter);
    const std::string where = path + ":" + std::to_string(line_number);
    Require(fields.size() >= needed, ErrorCode::kParse, where + ": too few columns");
    const auto value = ParseDouble(fields[rating_col]);
    Require(value.has_value(), ErrorCode::kParse,
            where + ": cannot parse rating '" + fields[rating_col] + "'");
    Require(std::isfinite(*value), ErrorCode::kParse, where + ": rating is not finite");
    Require(*value >= 0.0, ErrorCode::kInvalidArgument,
            where + ": negative rating " + fields[rating_col]);
    table.Add(std::string(Trim(fields[user_col])), std::string(Trim(fields[item_col])), *value);
    ++rows;
  }
  Require(rows > 0, ErrorCode::kParse, "ratings file " + path + " has no data rows");
  table.set_rows_read(rows);
  return table;
}

}  // namespace engagement

#endif  // ENGAGEMENT_RATINGS_HPP_
