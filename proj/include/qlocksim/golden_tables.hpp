// Reference addressing sequences for the 4-level base-2, 3-level base-3 and
// heterogeneous 2/5/3 column MUX: output, digit map, gate states in column order.
#pragma once
#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace qlocksim::golden {

struct Row {
  int output;
  std::string_view digits;
  std::string_view gates;  // one char per gate column: 1 = ON (activated), 0 = OFF
};

inline constexpr std::array<Row, 16> kBinary4{{
    {0, "0000", "01010101"},
    {8, "1000", "10010101"},
    {12, "1100", "10100101"},
    {4, "0100", "01100101"},
    {6, "0110", "01101001"},
    {14, "1110", "10101001"},
    {10, "1010", "10011001"},
    {2, "0010", "01011001"},
    {3, "0011", "01011010"},
    {11, "1011", "10011010"},
    {15, "1111", "10101010"},
    {7, "0111", "01101010"},
    {5, "0101", "01100110"},
    {13, "1101", "10100110"},
    {9, "1001", "10010110"},
    {1, "0001", "01010110"},
}};

inline constexpr std::array<Row, 27> kTernary3{{
    {0, "000", "011011011"},
    {9, "100", "101011011"},
    {18, "200", "110011011"},
    {21, "210", "110101011"},
    {12, "110", "101101011"},
    {3, "010", "011101011"},
    {6, "020", "011110011"},
    {15, "120", "101110011"},
    {24, "220", "110110011"},
    {25, "221", "110110101"},
    {16, "121", "101110101"},
    {7, "021", "011110101"},
    {4, "011", "011101101"},
    {13, "111", "101101101"},
    {22, "211", "110101101"},
    {19, "201", "110011101"},
    {10, "101", "101011101"},
    {1, "001", "011011101"},
    {2, "002", "011011110"},
    {11, "102", "101011110"},
    {20, "202", "110011110"},
    {23, "212", "110101110"},
    {14, "112", "101101110"},
    {5, "012", "011101110"},
    {8, "022", "011110110"},
    {17, "122", "101110110"},
    {26, "222", "110110110"},
}};

inline constexpr std::array<Row, 30> kMixed253{{
    {0, "000", "0101111011"},
    {15, "100", "1001111011"},
    {18, "110", "1010111011"},
    {3, "010", "0110111011"},
    {6, "020", "0111011011"},
    {21, "120", "1011011011"},
    {24, "130", "1011101011"},
    {9, "030", "0111101011"},
    {12, "040", "0111110011"},
    {27, "140", "1011110011"},
    {28, "141", "1011110101"},
    {13, "041", "0111110101"},
    {10, "031", "0111101101"},
    {25, "131", "1011101101"},
    {22, "121", "1011011101"},
    {7, "021", "0111011101"},
    {4, "011", "0110111101"},
    {19, "111", "1010111101"},
    {16, "101", "1001111101"},
    {1, "001", "0101111101"},
    {2, "002", "0101111110"},
    {17, "102", "1001111110"},
    {20, "112", "1010111110"},
    {5, "012", "0110111110"},
    {8, "022", "0111011110"},
    {23, "122", "1011011110"},
    {26, "132", "1011101110"},
    {11, "032", "0111101110"},
    {14, "042", "0111110110"},
    {29, "142", "1011110110"},
}};

struct Table {
  std::string_view name;
  std::span<const std::uint32_t> bases;
  std::span<const Row> rows;
};

inline constexpr std::array<std::uint32_t, 4> kBinary4Bases{2, 2, 2, 2};
inline constexpr std::array<std::uint32_t, 3> kTernary3Bases{3, 3, 3};
inline constexpr std::array<std::uint32_t, 3> kMixed253Bases{2, 5, 3};

inline constexpr std::array<Table, 3> kTables{{
    {"binary 4-level", kBinary4Bases, kBinary4},
    {"ternary 3-level", kTernary3Bases, kTernary3},
    {"mixed 2/5/3", kMixed253Bases, kMixed253},
}};

}  // namespace qlocksim::golden
