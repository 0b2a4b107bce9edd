#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "metagame/agent_sim.hpp"

namespace metagame::io {

// Game-records CSV: one flat row schema for all three families, with
// family-irrelevant cells left empty.
extern const char* const kRecordCsvHeader;

std::string record_to_csv_row(const sim::GameRecord& record);
void write_corpus_csv(const std::vector<sim::GameRecord>& records, std::ostream& out);
void write_corpus_csv(const std::vector<sim::GameRecord>& records, const std::string& path);

// Parses and validates one data row; `row` is the 1-based data row number
// used in error messages. Throws sim::IngestError.
sim::GameRecord record_from_csv_row(const std::string& line, long row);

std::vector<sim::GameRecord> read_corpus_csv(std::istream& in);

}  // namespace metagame::io
