#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "sva/json.hpp"
#include "sva/text.hpp"

using namespace sva;

TEST_CASE("splitter basic cases", "[text]") {
    CHECK(text::split_sentences("Sidewalk is wide. A bus stop is ahead.").size() == 2);
    CHECK(text::split_sentences("Turn onto Westlake Ave. N and continue.").size() == 1);
    CHECK(text::split_sentences("").empty());
}

TEST_CASE("splitter matches the hand-labeled corpus", "[text][corpus]") {
    std::ifstream in(std::string(SVA_TEST_DATA_DIR) + "/sentence_corpus.json");
    REQUIRE(in);
    const auto corpus = json::parse(in);
    REQUIRE(corpus.size() == 50);
    for (const auto& c : corpus) {
        const auto text = c.at("text").get<std::string>();
        const auto expected = c.at("sentences").get<std::vector<std::string>>();
        INFO(text);
        CHECK(text::split_sentences(text) == expected);
    }
}

TEST_CASE("splitter pieces are non-empty and reconstruct the text", "[text][property]") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> tokens = {"The",  "street", "St.", "Ave.", "e.g.", "is",  "A",   "\"Quote.\"", ".",
                                             "!",    "?",      " ",   "  ",   "\n",   "3.5", "(x)", "No.",        "ok",
                                             "Dr.",  "wide.",  "Mt.", "a",    "Z",    "?!",  "'",   "\xE2\x80\x9C"};
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1), len(0, 30);
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        const auto n = len(rng);
        for (std::size_t k = 0; k < n; ++k) s += tokens[pick(rng)] + (k % 2 ? " " : "");
        const auto pieces = text::split_sentences(s);
        std::string joined;
        for (const auto& p : pieces) {
            CHECK_FALSE(p.empty());
            CHECK(p == text::trim(p));
            joined += p + " ";
        }
        CHECK(text::normalize_whitespace(joined) == text::normalize_whitespace(s));
    }
}

TEST_CASE("string helpers", "[text]") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::to_lower("AbC") == "abc");
    CHECK(text::normalize_whitespace("  a \t b\n\nc ") == "a b c");
    CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::split("", ',') == std::vector<std::string>{""});
}
