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

#ifndef SQLAB_CORE_TRANSCRIPT_HPP_
#define SQLAB_CORE_TRANSCRIPT_HPP_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sqlab {

// One (query, answer) exchange. A missing answer is Bottom (the sparse
// vector's below-threshold response). The true expectation is recorded
// only when it was computable for the population at hand.
struct TranscriptEntry {
  std::string query_id;
  std::optional<double> answer;
  double empirical_on_answering_set = 0.0;
  std::optional<double> true_expectation;
  std::string state_note;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;
  bool halted = false;
  int rounds_detected = 0;
};

// Columns: query_id, answer_or_bottom, empirical_on_answering_set,
// true_expectation, mechanism_state_note.
void write_transcript_csv(const Transcript& transcript, std::ostream& out);

}  // namespace sqlab

#endif  // SQLAB_CORE_TRANSCRIPT_HPP_
