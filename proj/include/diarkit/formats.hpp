#pragma once

// Text formats crossing the tool boundary: RTTM speaker turns, CTM word
// alignments, frame-probability tracks, embedding records (one JSON object
// per line) and role maps. Parsers take whole-file strings and report
// 1-based line numbers on failure; writers emit LF endings.

#include <map>
#include <string>
#include <vector>

#include "diarkit/types.hpp"

namespace diarkit {

std::vector<SpeakerTurn> parse_rttm(const std::string& text);
std::string write_rttm(const std::vector<SpeakerTurn>& turns);

std::vector<Word> parse_ctm(const std::string& text);
std::string write_ctm(const std::string& file_id, const std::vector<Word>& words);

FrameTrack parse_frame_track(const std::string& text);
std::string write_frame_track(const FrameTrack& track);

std::vector<EmbeddingRecord> parse_embeddings(const std::string& text);
std::string write_embeddings(const std::vector<EmbeddingRecord>& records);

// Role map: one "speaker role" pair per line, role in {teacher, student}.
std::map<std::string, std::string> parse_role_map(const std::string& text);
std::string write_role_map(const std::map<std::string, std::string>& roles);

// Whole-file helpers used by the CLI.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace diarkit
