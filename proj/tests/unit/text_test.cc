#include <gtest/gtest.h>

#include <random>

#include "oracles.h"
#include "wildcut/text.h"

using wildcut::count_non_whitespace;
using wildcut::is_valid_utf8;

TEST(Text, CountsCodePointsNotBytes) {
  EXPECT_EQ(count_non_whitespace("hello world"), 10u);
  EXPECT_EQ(count_non_whitespace("你好 世界"), 4u);
  EXPECT_EQ(count_non_whitespace("こんにちは"), 5u);
  EXPECT_EQ(count_non_whitespace(" \t\n "), 0u);
  EXPECT_EQ(count_non_whitespace("a\xE3\x80\x80" "b"), 2u);  // ideographic space
  EXPECT_EQ(count_non_whitespace(""), 0u);
}

TEST(Text, InvalidBytesCountOncePerByte) {
  EXPECT_EQ(count_non_whitespace("a\xFF\xFE"), 3u);
  EXPECT_FALSE(is_valid_utf8("a\xFF"));
  EXPECT_FALSE(is_valid_utf8("\xC0\xAF"));       // overlong
  EXPECT_FALSE(is_valid_utf8("\xED\xA0\x80"));   // surrogate
  EXPECT_TRUE(is_valid_utf8("plain ascii 한국어"));
}

TEST(Text, MatchesOracleOnRandomMixedScripts) {
  const char* pieces[] = {"a", "Z", " ", "你", "好", "　", "é", "\t", "한", "ü"};
  std::mt19937 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) s += pieces[rng() % std::size(pieces)];
    EXPECT_EQ(count_non_whitespace(s), oracle::visible_chars(s)) << s;
  }
}
