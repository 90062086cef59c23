#include "pdgnn/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace pdgnn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_amount(std::string_view s, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("unparsable amount '" + std::string(s) + "'", line);
  }
  if (v < 0.0) throw ParseError("negative amount '" + std::string(s) + "'", line);
  return v;
}

std::uint64_t parse_timestamp(std::string_view s, std::size_t line) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("unparsable timestamp '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

LabelSet::LabelSet(std::vector<std::string> ids) {
  ids_.reserve(ids.size());
  for (auto& id : ids) ids_.push_back(lowercase(trim(id)));
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  std::erase(ids_, std::string{});
}

bool LabelSet::contains(std::string_view id) const {
  return std::binary_search(ids_.begin(), ids_.end(), lowercase(trim(id)));
}

std::vector<TransactionRecord> parse_transactions(std::istream& in, const CsvFormat& fmt) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  int col_from = -1, col_to = -1, col_value = -1, col_timestamp = -1;
  auto header = split(line, fmt.delimiter);
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = lowercase(trim(header[i]));
    if (name == "from") col_from = static_cast<int>(i);
    else if (name == "to") col_to = static_cast<int>(i);
    else if (name == "value") col_value = static_cast<int>(i);
    else if (name == "timestamp") col_timestamp = static_cast<int>(i);
  }
  if (col_from < 0) throw ConfigError("missing required column 'from'");
  if (col_to < 0) throw ConfigError("missing required column 'to'");
  if (col_value < 0) throw ConfigError("missing required column 'value'");
  if (col_timestamp < 0) throw ConfigError("missing required column 'timestamp'");
  const std::size_t ncols = header.size();

  std::vector<TransactionRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, fmt.delimiter);
    if (fields.size() != ncols) {
      throw ParseError("expected " + std::to_string(ncols) + " columns, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    TransactionRecord rec;
    rec.from_account = lowercase(trim(fields[col_from]));
    rec.to_account = lowercase(trim(fields[col_to]));
    if (rec.from_account.empty()) throw ParseError("empty 'from' account", lineno);
    if (rec.to_account.empty()) throw ParseError("empty 'to' account", lineno);
    rec.amount = parse_amount(fields[col_value], lineno);
    rec.timestamp = parse_timestamp(fields[col_timestamp], lineno);
    records.push_back(std::move(rec));
  }
  return records;
}

LabelSet parse_labels(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    ids.emplace_back(t);
  }
  return LabelSet(std::move(ids));
}

TransactionGraph build_graph(const std::vector<TransactionRecord>& records,
                             const LabelSet& labels) {
  // Nodes are the accounts occurring in at least one non-self record.
  std::vector<std::string> accounts;
  accounts.reserve(records.size() * 2);
  for (const auto& r : records) {
    if (r.from_account == r.to_account) continue;
    accounts.push_back(r.from_account);
    accounts.push_back(r.to_account);
  }
  std::sort(accounts.begin(), accounts.end());
  accounts.erase(std::unique(accounts.begin(), accounts.end()), accounts.end());

  auto index_of = [&accounts](const std::string& id) {
    return static_cast<std::uint32_t>(
        std::lower_bound(accounts.begin(), accounts.end(), id) - accounts.begin());
  };

  // Aggregate per ordered pair. Sorting the triples first makes the floating
  // sum independent of record order.
  struct Triple {
    std::uint32_t src, dst;
    double amount;
  };
  std::vector<Triple> triples;
  triples.reserve(records.size());
  for (const auto& r : records) {
    if (r.from_account == r.to_account) continue;
    triples.push_back({index_of(r.from_account), index_of(r.to_account), r.amount});
  }
  std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.src, a.dst, a.amount) < std::tie(b.src, b.dst, b.amount);
  });

  std::vector<DirectedEdge> edges;
  for (const auto& t : triples) {
    if (!edges.empty() && edges.back().src == t.src && edges.back().dst == t.dst) {
      edges.back().amount += t.amount;
      edges.back().count += 1;
    } else {
      edges.push_back({t.src, t.dst, t.amount, 1});
    }
  }

  std::vector<std::uint8_t> phishing(accounts.size(), 0);
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (labels.contains(accounts[i])) phishing[i] = 1;
  }
  return TransactionGraph::build(std::move(accounts), std::move(edges), std::move(phishing));
}

std::vector<TransactionRecord> parse_transactions_file(const std::string& path,
                                                       const CsvFormat& fmt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  return parse_transactions(in, fmt);
}

LabelSet parse_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  return parse_labels(in);
}

}  // namespace pdgnn
