#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sva::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
// Collapses every whitespace run into one space and trims the ends.
std::string normalize_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Abbreviations whose trailing period never ends a sentence.
const std::vector<std::string>& sentence_abbreviations();

// Rule-based splitter: a run of '.', '!' or '?' (plus closing quotes or
// brackets) ends a sentence when followed by whitespace and then an
// uppercase letter, a digit or an opening quote, unless the period closes
// an abbreviation. Pieces are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view s);

}  // namespace sva::text
