#pragma once

#include <string_view>

namespace wgl::testing {

// Canonical incenter lesson: 3-4-5 right triangle, bisectors at B and C.
inline constexpr std::string_view kIncenter =
    "wgl 1\n"
    "free A 0 0\n"
    "free B 4 0\n"
    "free C 0 3\n"
    "line ab A B\n"
    "line bc B C\n"
    "line ca C A\n"
    "bisector bisB A B C\n"
    "bisector bisC B C A\n"
    "xll I bisB bisC\n"
    "foot F I bc\n"
    "circle incircle I F\n";

inline constexpr std::string_view kCircumOrtho =
    "wgl 1\n"
    "free A 0 0\n"
    "free B 4 0\n"
    "free C 0 3\n"
    "line ab A B\n"
    "line bc B C\n"
    "line ca C A\n"
    "perpbis mab A B\n"
    "perpbis mbc B C\n"
    "perpbis mca C A\n"
    "xll O mab mbc\n"
    "perp hA A bc\n"
    "perp hB B ca\n"
    "perp hC C ab\n"
    "xll H hA hB\n";

// A line intersected with its own parallel.
inline constexpr std::string_view kParallelByConstruction =
    "wgl 1\n"
    "free A 0 0\n"
    "free B 4 0\n"
    "free C 1 3\n"
    "line l A B\n"
    "parallel p C l\n"
    "xll X l p\n";

// Two lines that happen to be parallel at the stored placement only.
inline constexpr std::string_view kInstanceParallel =
    "wgl 1\n"
    "free A 0 0\n"
    "free B 1 0\n"
    "free C 0 1\n"
    "free D 1 1\n"
    "line l A B\n"
    "line m C D\n"
    "xll X l m\n";

}  // namespace wgl::testing
