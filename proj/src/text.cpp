#include "sva/text.hpp"

#include <algorithm>
#include <cctype>

namespace sva::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Length of a closing quote/bracket at s[i], or 0. Covers ASCII and the
// UTF-8 right single/double quotation marks.
std::size_t closer_len(std::string_view s, std::size_t i) {
    if (i >= s.size()) return 0;
    const char c = s[i];
    if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
    if (s.substr(i, 3) == "\xE2\x80\x9D" || s.substr(i, 3) == "\xE2\x80\x99") return 3;
    return 0;
}

bool opens_sentence(std::string_view s, std::size_t i) {
    if (i >= s.size()) return false;
    const auto c = static_cast<unsigned char>(s[i]);
    if (std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(') return true;
    // Left single/double quotation marks.
    return s.substr(i, 3) == "\xE2\x80\x9C" || s.substr(i, 3) == "\xE2\x80\x98";
}

bool ends_with_abbreviation(std::string_view s, std::size_t period) {
    std::size_t start = period;
    while (start > 0 && !is_space(s[start - 1]) && s[start - 1] != '(' && s[start - 1] != '"') --start;
    const auto token = s.substr(start, period - start + 1);
    const auto& abbrevs = sentence_abbreviations();
    return std::find(abbrevs.begin(), abbrevs.end(), token) != abbrevs.end();
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

const std::vector<std::string>& sentence_abbreviations() {
    static const std::vector<std::string> kAbbrevs = {"St.", "Ave.", "Blvd.", "e.g.", "i.e.", "Dr.", "Mt.", "No."};
    return kAbbrevs;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        auto piece = trim(s.substr(b, e - b));
        if (!piece.empty()) out.push_back(std::move(piece));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        const std::size_t first = i;
        while (i < s.size() && (s[i] == '.' || s[i] == '!' || s[i] == '?')) ++i;
        const std::size_t last = i - 1;
        while (std::size_t n = closer_len(s, i)) i += n;
        const std::size_t end = i;
        if (i >= s.size() || !is_space(s[i])) continue;
        std::size_t next = i;
        while (next < s.size() && is_space(s[next])) ++next;
        if (!opens_sentence(s, next)) continue;
        if (first == last && s[first] == '.' && ends_with_abbreviation(s, first)) {
            // "No." only abbreviates "number"; as a one-word answer it ends the sentence.
            const bool bare_no = first >= 2 && s.substr(first - 2, 3) == "No." &&
                                 (first == 2 || is_space(s[first - 3])) &&
                                 !std::isdigit(static_cast<unsigned char>(s[next]));
            if (!bare_no) continue;
        }
        emit(start, end);
        start = next;
        i = next;
    }
    emit(start, s.size());
    return out;
}

}  // namespace sva::text
