// Copyright 2026 The sqlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sqlab/core/csv.hpp"

#include <cstdio>
#include <cstdlib>

#include "sqlab/core/error.hpp"
#include "sqlab/core/transcript.hpp"

namespace sqlab {

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw InvalidArgument("bad numeric field: " + s);
  return v;
}

}  // namespace

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << (needs_quoting(fields[i]) ? quote(fields[i]) : fields[i]);
  }
  out << '\n';
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  const Universe& u = dataset.universe();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const PointView p = dataset.point(i);
    switch (u.kind()) {
      case UniverseKind::kIndexed:
        out << p.code << '\n';
        break;
      case UniverseKind::kBitVectors: {
        for (unsigned j = 0; j < u.dim(); ++j) {
          if (j) out << ',';
          out << (p.bit(j) ? '1' : '0');
        }
        out << '\n';
        break;
      }
      case UniverseKind::kRealVectors: {
        for (unsigned j = 0; j < u.dim(); ++j) {
          if (j) out << ',';
          out << csv_double(p.real(j));
        }
        out << '\n';
        break;
      }
    }
  }
}

Dataset read_dataset_csv(const Universe& universe, std::istream& in) {
  std::vector<std::uint64_t> codes;
  std::vector<double> reals;
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    switch (universe.kind()) {
      case UniverseKind::kIndexed: {
        if (fields.size() != 1) {
          throw InvalidArgument("indexed dataset rows take one column");
        }
        codes.push_back(std::strtoull(fields[0].c_str(), nullptr, 10));
        break;
      }
      case UniverseKind::kBitVectors: {
        if (fields.size() != universe.dim()) {
          throw InvalidArgument("bit-vector dataset rows need d columns");
        }
        std::uint64_t code = 0;
        for (unsigned j = 0; j < universe.dim(); ++j) {
          if (fields[j] == "1") {
            code |= std::uint64_t{1} << j;
          } else if (fields[j] != "0") {
            throw InvalidArgument("bit-vector entries must be 0 or 1");
          }
        }
        codes.push_back(code);
        break;
      }
      case UniverseKind::kRealVectors: {
        if (fields.size() != universe.dim()) {
          throw InvalidArgument("real-vector dataset rows need d columns");
        }
        for (const auto& f : fields) reals.push_back(parse_double(f));
        break;
      }
    }
    ++n;
  }
  if (universe.kind() == UniverseKind::kRealVectors) {
    return Dataset::from_reals(universe, std::move(reals), n);
  }
  return Dataset::from_codes(universe, std::move(codes));
}

void write_query_csv(const Query& query, const Universe& universe,
                     std::ostream& out) {
  const auto table = query.tabulate(universe);
  for (std::uint64_t x = 0; x < table.size(); ++x) {
    out << x << ',' << csv_double(table[x]) << '\n';
  }
}

Query read_query_csv(std::string id, const Universe& universe,
                     std::istream& in) {
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("query import needs a tabulatable universe");
  }
  std::vector<double> values(universe.size(), 0.0);
  std::vector<bool> seen(universe.size(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 2) {
      throw InvalidArgument("query rows are (index, value)");
    }
    const std::uint64_t x = std::strtoull(fields[0].c_str(), nullptr, 10);
    if (x >= values.size()) {
      throw UniverseMismatch("query index outside the universe");
    }
    values[x] = parse_double(fields[1]);
    seen[x] = true;
  }
  for (std::size_t x = 0; x < seen.size(); ++x) {
    if (!seen[x]) {
      throw InvalidArgument("query table is missing index " +
                            std::to_string(x));
    }
  }
  return Query::from_table(std::move(id), std::move(values));
}

void write_transcript_csv(const Transcript& transcript, std::ostream& out) {
  write_csv_row(out, {"query_id", "answer_or_bottom",
                      "empirical_on_answering_set", "true_expectation",
                      "mechanism_state_note"});
  for (const auto& e : transcript.entries) {
    write_csv_row(
        out, {e.query_id, e.answer ? csv_double(*e.answer) : "bottom",
              csv_double(e.empirical_on_answering_set),
              e.true_expectation ? csv_double(*e.true_expectation) : "",
              e.state_note});
  }
}

}  // namespace sqlab
