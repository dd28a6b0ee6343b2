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

#ifndef SQLAB_CORE_CSV_HPP_
#define SQLAB_CORE_CSV_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sqlab/core/dataset.hpp"
#include "sqlab/core/query.hpp"
#include "sqlab/core/universe.hpp"

namespace sqlab {

// RFC-4180 CSV, LF line endings, '.' decimal separator. Floats are
// rendered with 17 significant digits so round-trips are exact.
std::string csv_double(double v);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
std::vector<std::string> split_csv_row(const std::string& line);

// Dataset rows: Indexed -> one integer column; BitVectors -> d 0/1
// columns; RealVectors -> d float columns. No header row.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);
Dataset read_dataset_csv(const Universe& universe, std::istream& in);

// Query tabulation rows: (index, value). No header row.
void write_query_csv(const Query& query, const Universe& universe,
                     std::ostream& out);
Query read_query_csv(std::string id, const Universe& universe,
                     std::istream& in);

}  // namespace sqlab

#endif  // SQLAB_CORE_CSV_HPP_
