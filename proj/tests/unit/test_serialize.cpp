//------------------------------------------------------------------------------
//
//   Copyright 2026 The ctvae Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------


#include "ctvae/error.hpp"
#include "ctvae/sampler.hpp"
#include "ctvae/serialize.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "toy_models.hpp"

#include <cstring>
#include <fstream>
#include <random>

using namespace ctvae;
using namespace ctvae::testing;

namespace {

// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
std::uint32_t reference_crc(std::uint8_t const *data, std::size_t n)
{
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i)
  {
    crc ^= data[i];
    for (int b = 0; b < 8; ++b)
    {
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
  }
  return ~crc;
}

std::uint32_t read_u32(std::vector<std::uint8_t> const &b, std::size_t at)
{
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

void write_u32(std::vector<std::uint8_t> &b, std::size_t at, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i)
  {
    b[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

constexpr std::size_t kHeader = 20;

void reseal(std::vector<std::uint8_t> &b)
{
  write_u32(b, 8, reference_crc(b.data() + kHeader, b.size() - kHeader));
}

ErrorKind kind_of(std::vector<std::uint8_t> const &bytes, std::string *message = nullptr)
{
  try
  {
    deserialize_model(bytes);
  }
  catch (Error const &e)
  {
    if (message)
    {
      *message = e.what();
    }
    return e.kind();
  }
  FAIL("deserialize accepted a damaged file");
  return ErrorKind::argument;
}

Model trained_model()
{
  static Model const m = train_tiny(3, 2).model;
  return m;
}

}  // namespace

TEST_CASE("header layout")
{
  auto const bytes = serialize_model(trained_model());
  REQUIRE(bytes.size() > kHeader);
  CHECK(std::memcmp(bytes.data(), "CTVM", 4) == 0);
  CHECK(read_u32(bytes, 4) == kModelFormatVersion);
  CHECK(read_u32(bytes, 8) == reference_crc(bytes.data() + kHeader, bytes.size() - kHeader));
  std::uint64_t size = 0;
  for (int i = 7; i >= 0; --i)
  {
    size = size << 8 | bytes[12 + static_cast<std::size_t>(i)];
  }
  CHECK(size == bytes.size() - kHeader);
}

TEST_CASE("round trip is bit exact")
{
  auto const m     = trained_model();
  auto const bytes = serialize_model(m);
  auto const back  = deserialize_model(bytes);
  CHECK(back == m);
  CHECK(back.catalog == m.catalog);
  CHECK(serialize_model(back) == bytes);
  CHECK(model_id(back) == model_id(m));
  CHECK(model_id(m).rfind("ctvm-", 0) == 0);
  CHECK(model_id(m).size() == 13);

  auto const c      = build_condition(m.bundle, m.catalog.front().conditions);
  auto const before = generate(m, c, 200, 42);
  auto const after  = generate(back, c, 200, 42);
  CHECK(format_table(before.rows) == format_table(after.rows));
}

TEST_CASE("round trip of random toy models")
{
  std::mt19937_64 gen(8);
  for (int i = 0; i < 30; ++i)
  {
    auto m = random_toy_model(gen);
    m.params[0].value(0) = -0.0;
    CHECK(deserialize_model(serialize_model(m)) == m);
  }
}

TEST_CASE("save and load through a file")
{
  auto const dir  = scratch_dir("serialize");
  auto const path = (dir / "m.ctvm").string();
  save_model(trained_model(), path);
  CHECK(load_model(path) == trained_model());
  try
  {
    load_model((dir / "missing.ctvm").string());
    FAIL("expected io error");
  }
  catch (Error const &e)
  {
    CHECK(e.kind() == ErrorKind::io);
  }
  CHECK_THROWS_AS(save_model(trained_model(), (dir / "no" / "such" / "m.ctvm").string()), Error);
}

TEST_CASE("damaged files are rejected")
{
  auto const good = serialize_model(trained_model());

  SUBCASE("wrong magic")
  {
    auto b = good;
    b[0]   = 'X';
    CHECK(kind_of(b) == ErrorKind::corruption);
  }
  SUBCASE("empty file")
  {
    CHECK(kind_of({}) == ErrorKind::corruption);
  }
  SUBCASE("newer format version")
  {
    auto b = good;
    write_u32(b, 4, kModelFormatVersion + 1);
    std::string msg;
    CHECK(kind_of(b, &msg) == ErrorKind::version);
    CHECK(msg.find(std::to_string(kModelFormatVersion + 1)) != std::string::npos);
    CHECK(msg.find("version " + std::to_string(kModelFormatVersion)) != std::string::npos);
  }
  SUBCASE("flipped payload byte")
  {
    auto b = good;
    b[b.size() / 2] ^= 0x40;
    std::string msg;
    CHECK(kind_of(b, &msg) == ErrorKind::corruption);
    CHECK(msg.find("checksum") != std::string::npos);
  }
  SUBCASE("truncated")
  {
    for (std::size_t keep : {std::size_t{3}, kHeader, good.size() / 2, good.size() - 1})
    {
      std::vector<std::uint8_t> b(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(keep));
      CHECK(kind_of(b) == ErrorKind::corruption);
    }
  }
  SUBCASE("truncated payload with a consistent header")
  {
    std::vector<std::uint8_t> b(good.begin(), good.end() - 9);
    std::uint64_t const size = b.size() - kHeader;
    for (int i = 0; i < 8; ++i)
    {
      b[12 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(size >> (8 * i));
    }
    reseal(b);
    CHECK(kind_of(b) == ErrorKind::corruption);
  }
  SUBCASE("trailing bytes with a consistent header")
  {
    auto b = good;
    b.push_back(0);
    std::uint64_t const size = b.size() - kHeader;
    for (int i = 0; i < 8; ++i)
    {
      b[12 + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(size >> (8 * i));
    }
    reseal(b);
    CHECK(kind_of(b) == ErrorKind::corruption);
  }
}
