#include <doctest.h>

#include <cmath>
#include <vector>

#include "gil/rng.hpp"

using namespace gil;

// Known-answer vectors published with the Random123 distribution.
TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::bijection(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream output is the bijection of (block, stream)") {
  Philox4x32 g(0x0000000500000007ull, 0x0000000900000003ull);
  const auto b0 = Philox4x32::bijection({0, 0, 3, 9}, {7, 5});
  const auto b1 = Philox4x32::bijection({1, 0, 3, 9}, {7, 5});
  for (int i = 0; i < 4; ++i)
    CHECK(g() == b0[i]);
  for (int i = 0; i < 4; ++i)
    CHECK(g() == b1[i]);
}

TEST_CASE("substreams are reproducible and distinct") {
  auto a = substream(42, Substream::Speckle, 7);
  auto b = substream(42, Substream::Speckle, 7);
  auto c = substream(42, Substream::Noise, 7);
  auto d = substream(42, Substream::Speckle, 8);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
  auto g = substream(1, Substream::Test, 0);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // 5 sigma bands
  CHECK(std::abs(mean - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(var - 1.0 / 12) < 5 * std::sqrt(1.0 / 180 / n));
}

TEST_CASE("normal pairs have zero mean, unit variance, no correlation") {
  auto g = substream(2, Substream::Test, 0);
  const int n = 100000;
  double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
  for (int i = 0; i < n; ++i) {
    const auto [x, y] = g.normal_pair();
    s0 += x;
    s1 += y;
    s00 += x * x;
    s11 += y * y;
    s01 += x * y;
  }
  const double tol = 5 / std::sqrt(double(n));
  CHECK(std::abs(s0 / n) < tol);
  CHECK(std::abs(s1 / n) < tol);
  CHECK(std::abs(s00 / n - 1) < 2 * tol);
  CHECK(std::abs(s11 / n - 1) < 2 * tol);
  CHECK(std::abs(s01 / n) < tol);
}
