#include <array>
#include <bit>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "qsi/broadword.hpp"

using namespace qsi::broadword;
using qsi::Word;

namespace {

// bit-by-bit references
unsigned naive_lsb(Word w)
{
    unsigned i = 0;
    while (((w >> i) & 1) == 0) {
        ++i;
    }
    return i;
}

unsigned naive_select(Word w, unsigned rank)
{
    for (unsigned i = 0; i < 64; ++i) {
        if ((w >> i) & 1) {
            if (rank == 0) {
                return i;
            }
            --rank;
        }
    }
    return 64;
}

unsigned table_popcount(Word w)
{
    static const auto table = [] {
        std::array<unsigned, 256> t{};
        for (unsigned b = 0; b < 256; ++b) {
            for (unsigned v = b; v != 0; v >>= 1) {
                t[b] += v & 1;
            }
        }
        return t;
    }();
    unsigned c = 0;
    for (int i = 0; i < 8; ++i) {
        c += table[(w >> (8 * i)) & 0xFF];
    }
    return c;
}

Word random_word(std::mt19937_64& rng)
{
    // mix dense, sparse and uniform words
    switch (rng() % 3) {
    case 0:
        return rng();
    case 1:
        return rng() & rng() & rng();
    default:
        return rng() | rng() | rng();
    }
}

} // namespace

TEST(Broadword, LeastSignificantBitExamples)
{
    EXPECT_EQ(least_significant_bit(0b1), 0u);
    EXPECT_EQ(least_significant_bit(0b1000), 3u);
    EXPECT_EQ(least_significant_bit(0x8000000000000000ULL), 63u);
    EXPECT_EQ(lsb_debruijn(0x8000000000000000ULL), 63u);
}

TEST(Broadword, LeastSignificantBitAllSingleBits)
{
    for (unsigned i = 0; i < 64; ++i) {
        const Word w = Word(1) << i;
        EXPECT_EQ(least_significant_bit(w), i);
        EXPECT_EQ(lsb_debruijn(w), i);
        EXPECT_EQ(least_significant_bit(w | (w << 1)), i);
    }
}

TEST(Broadword, SidewaysAdditionExamples)
{
    EXPECT_EQ(sideways_addition(0), 0u);
    EXPECT_EQ(sideways_addition(0xFFFFFFFFFFFFFFFFULL), 64u);
    EXPECT_EQ(sideways_addition(0b01011010), 4u);
}

TEST(Broadword, SelectInWordExamples)
{
    EXPECT_EQ(select_in_word(0b1011, 0), 0u);
    EXPECT_EQ(select_in_word(0b1011, 2), 3u);
    EXPECT_EQ(select_in_word(0x8000000000000000ULL, 0), 63u);
    EXPECT_EQ(select_in_word(~Word(0), 63), 63u);
}

TEST(Broadword, RandomWordsAgreeWithBitLoops)
{
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 1'000'000; ++iter) {
        const Word w = random_word(rng);
        const unsigned pop = sideways_addition(w);
        ASSERT_EQ(pop, table_popcount(w));
        ASSERT_EQ(pop, static_cast<unsigned>(std::popcount(w)));
        if (w == 0) {
            continue;
        }
        ASSERT_EQ(least_significant_bit(w), naive_lsb(w));
        ASSERT_EQ(select_in_word(w, 0), least_significant_bit(w));
        const auto r = static_cast<unsigned>(rng() % pop);
        const unsigned s = select_in_word(w, r);
        ASSERT_EQ(s, naive_select(w, r)) << std::hex << w << " rank " << std::dec << r;
        ASSERT_TRUE((w >> s) & 1);
        ASSERT_EQ(sideways_addition(w & low_mask(s)), r);
    }
}

TEST(Broadword, SelectEveryRankOfDenseWords)
{
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 2000; ++iter) {
        const Word w = random_word(rng);
        const unsigned pop = sideways_addition(w);
        for (unsigned r = 0; r < pop; ++r) {
            ASSERT_EQ(select_in_word(w, r), naive_select(w, r));
        }
    }
}

TEST(Broadword, LowMaskAndBitLength)
{
    EXPECT_EQ(low_mask(0), 0u);
    EXPECT_EQ(low_mask(3), 7u);
    EXPECT_EQ(low_mask(64), ~Word(0));
    EXPECT_EQ(bit_length(0), 0u);
    EXPECT_EQ(bit_length(1), 1u);
    EXPECT_EQ(bit_length(36), 6u);
}
