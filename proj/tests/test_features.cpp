#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "flag/features.hpp"
#include "support.hpp"

using namespace flag;
using flag::testkit::index_of_line;

namespace {

// Textbook recursion, no memo: fine for short strings.
std::size_t naive_distance(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    const std::size_t cost = a.back() == b.back() ? 0 : 1;
    return std::min({naive_distance(a.substr(0, a.size() - 1), b) + 1,
                     naive_distance(a, b.substr(0, b.size() - 1)) + 1,
                     naive_distance(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1)) + cost});
}

std::string random_word(std::mt19937& rng, std::size_t max_len) {
    std::string s(rng() % (max_len + 1), 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng() % 3);
    return s;
}

GeneratedLine gen(std::string text) {
    GeneratedLine g;
    g.text = std::move(text);
    return g;
}

}  // namespace

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein("return 0;", "return 0;"), 0u);
    EXPECT_EQ(levenshtein("if(index <size) {", "if (index >= 0 && index <size) {"), 15u);
    EXPECT_EQ(levenshtein("}", "} else {"), 7u);
    EXPECT_EQ(levenshtein("", "abc"), 3u);
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
}

TEST(Levenshtein, CountsCodePointsNotBytes) {
    EXPECT_EQ(levenshtein("caf\xC3\xA9", "cafe"), 1u);
    EXPECT_EQ(levenshtein("\xE2\x82\xAC", ""), 1u);
}

TEST(Levenshtein, MatchesNaiveRecursion) {
    std::mt19937 rng(11);
    for (int i = 0; i < 3000; ++i) {
        const auto a = random_word(rng, 5);
        const auto b = random_word(rng, 5);
        ASSERT_EQ(levenshtein(a, b), naive_distance(a, b)) << a << " / " << b;
    }
}

TEST(Levenshtein, MetricProperties) {
    std::mt19937 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_word(rng, 8);
        const auto b = random_word(rng, 8);
        const auto c = random_word(rng, 8);
        EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
        EXPECT_EQ(levenshtein(a, a), 0u);
        EXPECT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
        const auto diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
        EXPECT_GE(levenshtein(a, b), diff);
        EXPECT_LE(levenshtein(a, b), std::max(a.size(), b.size()));
    }
}

TEST(Bleu, Examples) {
    const std::vector<std::string> ab{"a", "b"}, acd{"a", "c", "d"}, xy{"x", "y"};
    EXPECT_DOUBLE_EQ(bleu(ab, ab, 1)[0], 1.0);
    EXPECT_DOUBLE_EQ(bleu(ab, xy, 1)[0], 0.0);
    EXPECT_NEAR(bleu(ab, acd, 1)[0], 0.5 * std::exp(1.0 - 1.5), 1e-12);
    EXPECT_NEAR(bleu(ab, acd, 1)[0], 0.3033, 1e-4);
    EXPECT_DOUBLE_EQ(bleu({}, ab, 1)[0], 0.0);
}

TEST(Bleu, CumulativeHandOracle) {
    // candidate: the cat sat on mat (5), reference: the cat sat on the mat (6)
    const std::vector<std::string> cand{"the", "cat", "sat", "on", "mat"};
    const std::vector<std::string> ref{"the", "cat", "sat", "on", "the", "mat"};
    const auto scores = bleu(cand, ref, 4);
    ASSERT_EQ(scores.size(), 4u);
    const double bp = std::exp(1.0 - 6.0 / 5.0);
    const double p1 = 5.0 / 5, p2 = 3.0 / 4, p3 = 2.0 / 3, p4 = 1.0 / 2;
    EXPECT_NEAR(scores[0], bp * p1, 1e-12);
    EXPECT_NEAR(scores[1], bp * std::sqrt(p1 * p2), 1e-12);
    EXPECT_NEAR(scores[2], bp * std::cbrt(p1 * p2 * p3), 1e-12);
    EXPECT_NEAR(scores[3], bp * std::pow(p1 * p2 * p3 * p4, 0.25), 1e-12);
}

TEST(Bleu, ClippedCountsAndRange) {
    const std::vector<std::string> cand{"the", "the", "the"};
    const std::vector<std::string> ref{"the", "cat"};
    EXPECT_NEAR(bleu(cand, ref, 1)[0], 1.0 / 3.0, 1e-12);
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> a(1 + rng() % 6), b(1 + rng() % 6);
        for (auto& t : a) t = random_word(rng, 1);
        for (auto& t : b) t = random_word(rng, 1);
        const auto s = bleu(a, b, 1)[0];
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        auto shuffled = a;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_NEAR(bleu(shuffled, b, 1)[0], s, 1e-12);
    }
}

TEST(CommentTokens, StripsMarkers) {
    const auto t = comment_tokens("// Hello World  */", profile(Language::c));
    EXPECT_EQ(t, (std::vector<std::string>{"hello", "world"}));
    EXPECT_EQ(comment_tokens("# x", profile(Language::python)), std::vector<std::string>{"x"});
}

TEST(Dfc, WorkedExample) {
    const auto file = testkit::get_value_file();
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 11)), 0u);
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 12)), 1u);
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 13)), 2u);
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 14)), 3u);
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 15)), 4u);
    EXPECT_EQ(distance_from_comment(file, index_of_line(file, 10)), 9u);
}

TEST(Dfc, NoPriorComment) {
    const auto file = preprocess("int a;\nint b;\n// c\n", Language::c);
    EXPECT_FALSE(distance_from_comment(file, 0).has_value());
    EXPECT_FALSE(distance_from_comment(file, 1).has_value());
    EXPECT_EQ(distance_from_comment(file, 2), 0u);
}

TEST(Dfc, BlankLinesDoNotCount) {
    const auto file = preprocess("// c\n\n\nint a;\n", Language::c);
    EXPECT_EQ(distance_from_comment(file, 1), 1u);
}

TEST(ExtractFeatures, WorkedExampleRows) {
    const auto file = testkit::get_value_file();
    const auto row = [&](int line_no, const std::string& generated) {
        const auto loc = index_of_line(file, line_no);
        return extract_features(file.lines[loc], gen(generated), file, loc);
    };
    const auto f12 = row(12, "    if (index >= 0 && index <size) {");
    EXPECT_EQ(f12.ld, 15u);
    EXPECT_EQ(f12.dfc, 1u);
    EXPECT_FALSE(f12.bleu1.has_value());

    const auto f13 = row(13, "        return array[index];");
    EXPECT_EQ(f13.ld, 0u);
    EXPECT_EQ(f13.dfc, 2u);

    const auto f14 = row(14, "    } else {");
    EXPECT_EQ(f14.ld, 7u);
    EXPECT_EQ(f14.dfc, 3u);

    const auto f10 = row(10, "int getValueFromArray(int* array,int size,int index) {");
    EXPECT_EQ(f10.ld, 1u);
    EXPECT_EQ(f10.ld_no_ws, 0u);

    const auto f11 = row(11, "//if the index is out of bounds return -1");
    EXPECT_EQ(f11.ld, 0u);
    EXPECT_EQ(f11.dfc, 0u);
    ASSERT_TRUE(f11.bleu1.has_value());
    EXPECT_GT(*f11.bleu1, 0.0);
    EXPECT_LT(*f11.bleu1, 1.0);
}

TEST(ExtractFeatures, CommentBleuOrientation) {
    // Generated comment is the candidate, original is the reference.
    const auto file = testkit::get_value_file();
    const auto loc = index_of_line(file, 11);
    const auto f = extract_features(file.lines[loc], gen("//if the index is out of bounds return -1"), file, loc);
    const auto cand = comment_tokens("//if the index is out of bounds return -1", profile(Language::c));
    const auto ref = comment_tokens(file.lines[loc].comment_part, profile(Language::c));
    EXPECT_NEAR(*f.bleu1, bleu(cand, ref, 1)[0], 1e-12);
    ASSERT_TRUE(f.bleu_cumulative.has_value());
    EXPECT_NEAR((*f.bleu_cumulative)[0], *f.bleu1, 1e-12);
}

TEST(ExtractFeatures, Identity) {
    const auto file = preprocess("int a = 1; // set a\nint b;\n", Language::c);
    const auto f = extract_features(file.lines[0], gen(file.lines[0].raw), file, 0);
    EXPECT_EQ(f.ld, 0u);
    EXPECT_EQ(f.ld_no_ws, 0u);
    EXPECT_DOUBLE_EQ(*f.bleu1, 1.0);
}

TEST(ExtractFeatures, EmptyGenerationIsPlainDistance) {
    const auto file = preprocess("return x;\n", Language::c);
    const auto f = extract_features(file.lines[0], gen(""), file, 0);
    EXPECT_EQ(f.ld, 9u);
}

TEST(ExtractFeatures, MeanLogprobCarried) {
    const auto file = preprocess("return x;\n", Language::c);
    auto g = gen("return y;");
    g.token_logprobs = std::vector<double>{-0.2, -0.4};
    const auto f = extract_features(file.lines[0], g, file, 0);
    EXPECT_NEAR(*f.mean_logprob, -0.3, 1e-12);
}

TEST(ExtractFileFeatures, PrevCommentBleu) {
    const auto file = preprocess("// add one\nx = x + 1;\n", Language::c);
    const std::vector<GeneratedLine> generated{gen("// add one"), gen("x = x + 2;")};
    const auto fs = extract_file_features(file, generated);
    ASSERT_EQ(fs.size(), 2u);
    EXPECT_DOUBLE_EQ(*fs[0].bleu1, 1.0);
    EXPECT_DOUBLE_EQ(*fs[1].prev_comment_bleu1, 1.0);
    EXPECT_EQ(fs[1].ld, 1u);
}

TEST(StripWhitespace, RemovesAll) {
    EXPECT_EQ(strip_whitespace(" a\tb  c\n"), "abc");
}
