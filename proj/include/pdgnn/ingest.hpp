#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pdgnn/graph.hpp"

namespace pdgnn {

// One raw directed transfer. Accounts are lowercased at parse time.
struct TransactionRecord {
  std::string from_account;
  std::string to_account;
  double amount = 0.0;
  std::uint64_t timestamp = 0;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

// Normalized, deduplicated set of labeled phishing accounts.
class LabelSet {
public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> ids);

  bool contains(std::string_view id) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }

private:
  std::vector<std::string> ids_;  // lowercased, sorted, unique
};

struct CsvFormat {
  char delimiter = ',';
};

// Delimited text with a header row naming columns from, to, value, timestamp
// (any order, extra columns ignored). Malformed rows raise ParseError with
// the line number; a missing required column raises ConfigError.
std::vector<TransactionRecord> parse_transactions(std::istream& in, const CsvFormat& fmt = {});

// One address per line; '#' comments and blank lines allowed.
LabelSet parse_labels(std::istream& in);

// Aggregates records to one arc per ordered pair (a = sum of amounts,
// t = count). Self-transfers are dropped entirely. Labeled accounts present
// in the records are flagged phishing. Order-insensitive: any permutation of
// `records` produces an identical graph.
TransactionGraph build_graph(const std::vector<TransactionRecord>& records, const LabelSet& labels);

std::vector<TransactionRecord> parse_transactions_file(const std::string& path, const CsvFormat& fmt = {});
LabelSet parse_labels_file(const std::string& path);

}  // namespace pdgnn
