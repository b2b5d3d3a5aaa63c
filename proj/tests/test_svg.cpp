#include <doctest.h>

#include <regex>

#include "support/fixtures.hpp"
#include "wgl/format.hpp"
#include "wgl/svg.hpp"

using namespace wgl;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("render the incenter lesson with all three bisectors") {
  const auto c =
      format::parse(std::string(testing::kIncenter) + "bisector bisA C A B\n").value();
  const auto f = evaluate(c).value();
  const std::string svg = svg::render(c, f);
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(count(svg, "<line ") == 6);
  CHECK(count(svg, "<circle ") == 1);
  // Free points A, B, C plus I and F.
  CHECK(count(svg, "<path ") == 5);
  CHECK(count(svg, "<text ") == 5);
}

TEST_CASE("viewport fits the figure with a margin") {
  const auto c = format::parse("wgl 1\nfree A 0 0\nfree B 10 0\nline l A B\n").value();
  const std::string svg = svg::render(c, evaluate(c).value());
  // Box [0,10]x[0,0] grows by 10% of the larger side on every edge.
  CHECK(svg.find("viewBox=\"-1 -1 12 2\"") != std::string::npos);
  // The x-axis is clipped to the viewport width.
  CHECK(svg.find("x1=\"-1\" y1=\"0\" x2=\"11\" y2=\"0\"") != std::string::npos);
}

TEST_CASE("empty construction renders an empty canvas") {
  const std::string svg = svg::render(Construction{}, Figure{});
  CHECK(count(svg, "<line ") == 0);
  CHECK(svg.find("viewBox=\"-1.2 -1.2 2.4 2.4\"") != std::string::npos);
}
