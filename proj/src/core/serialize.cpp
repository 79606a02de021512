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

#include "ctvae/serialize.hpp"

#include "ctvae/error.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ctvae {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'V', 'M'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8;

class Writer
{
public:
  void u8(std::uint8_t v)
  {
    buf_.push_back(v);
  }
  void u32(std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i)
    {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void u64(std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i)
    {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f64(double v)
  {
    u64(std::bit_cast<std::uint64_t>(v));
  }
  void str(std::string const &s)
  {
    u64(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take()
  {
    return std::move(buf_);
  }

private:
  std::vector<std::uint8_t> buf_;
};

class Reader
{
public:
  Reader(std::uint8_t const *data, std::size_t size)
    : data_(data)
    , size_(size)
  {}

  std::uint8_t u8()
  {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32()
  {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
    {
      v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    }
    return v;
  }
  std::uint64_t u64()
  {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
    {
      v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    }
    return v;
  }
  double f64()
  {
    return std::bit_cast<double>(u64());
  }
  std::string str()
  {
    auto const n = u64();
    need(n);
    std::string s(reinterpret_cast<char const *>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  // Guards element counts against truncated or hostile input.
  std::uint64_t count(std::size_t min_element_size)
  {
    auto const n = u64();
    if (min_element_size != 0 && n > (size_ - pos_) / min_element_size)
    {
      fail(ErrorKind::corruption, "model file: element count exceeds payload");
    }
    return n;
  }
  bool done() const noexcept
  {
    return pos_ == size_;
  }

private:
  void need(std::size_t n) const
  {
    if (n > size_ - pos_)
    {
      fail(ErrorKind::corruption, "model file: truncated payload");
    }
  }

  std::uint8_t const *data_;
  std::size_t         size_;
  std::size_t         pos_ = 0;
};

void write_cell(Writer &w, Cell const &c)
{
  if (auto const *d = std::get_if<double>(&c))
  {
    w.u8(0);
    w.f64(*d);
  }
  else
  {
    w.u8(1);
    w.str(std::get<std::string>(c));
  }
}

Cell read_cell(Reader &r)
{
  switch (r.u8())
  {
  case 0:
    return r.f64();
  case 1:
    return r.str();
  default:
    fail(ErrorKind::corruption, "model file: bad cell tag");
  }
}

std::vector<std::uint8_t> payload_of(Model const &m)
{
  Writer w;
  auto const &schema = m.bundle.schema;
  w.str(schema.group_key);
  w.u64(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c)
  {
    auto const &spec = schema.columns[c];
    w.str(spec.name);
    w.u8(spec.kind == ColumnKind::continuous ? 0 : 1);
    w.u8(spec.role == ColumnRole::target ? 0 : 1);
    if (auto const *ct = std::get_if<ContinuousTransform>(&m.bundle.transforms[c]))
    {
      w.u64(ct->mixture.components());
      for (std::size_t k = 0; k < ct->mixture.components(); ++k)
      {
        w.f64(ct->mixture.weights[k]);
        w.f64(ct->mixture.means[k]);
        w.f64(ct->mixture.stds[k]);
      }
      w.f64(ct->min);
      w.f64(ct->max);
    }
    else
    {
      auto const &dt = std::get<DiscreteTransform>(m.bundle.transforms[c]);
      w.u64(dt.vocabulary.size());
      for (auto const &v : dt.vocabulary)
      {
        w.str(v);
      }
    }
  }

  w.u64(m.arch.enc_h1);
  w.u64(m.arch.enc_h2);
  w.u64(m.arch.latent);
  w.u64(m.arch.dec_h1);
  w.u64(m.arch.dec_h2);
  w.u8(m.conditioning ? 1 : 0);

  w.u64(m.params.size());
  for (auto const &p : m.params)
  {
    w.str(p.name);
    w.u64(static_cast<std::uint64_t>(p.value.rows()));
    w.u64(static_cast<std::uint64_t>(p.value.cols()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
    {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c)
      {
        w.f64(p.value(r, c));
      }
    }
  }

  w.u64(m.catalog.size());
  for (auto const &prod : m.catalog)
  {
    w.str(prod.id);
    w.u64(prod.conditions.size());
    for (auto const &[name, value] : prod.conditions)
    {
      w.str(name);
      write_cell(w, value);
    }
  }
  return w.take();
}

Model model_from_payload(Reader &r)
{
  Schema schema;
  schema.group_key  = r.str();
  auto const ncols  = r.count(8 + 2);
  std::vector<ColumnTransform> transforms;
  for (std::uint64_t c = 0; c < ncols; ++c)
  {
    ColumnSpec spec;
    spec.name = r.str();
    spec.kind = r.u8() == 0 ? ColumnKind::continuous : ColumnKind::discrete;
    spec.role = r.u8() == 0 ? ColumnRole::target : ColumnRole::condition;
    if (spec.kind == ColumnKind::continuous)
    {
      ContinuousTransform t;
      auto const          k = r.count(24);
      for (std::uint64_t i = 0; i < k; ++i)
      {
        t.mixture.weights.push_back(r.f64());
        t.mixture.means.push_back(r.f64());
        t.mixture.stds.push_back(r.f64());
      }
      t.min = r.f64();
      t.max = r.f64();
      if (k == 0)
      {
        fail(ErrorKind::corruption, "model file: mixture without components");
      }
      transforms.emplace_back(std::move(t));
    }
    else
    {
      DiscreteTransform t;
      auto const        k = r.count(8);
      for (std::uint64_t i = 0; i < k; ++i)
      {
        t.vocabulary.push_back(r.str());
      }
      transforms.emplace_back(std::move(t));
    }
    schema.columns.push_back(std::move(spec));
  }

  Model m;
  try
  {
    validate(schema);
    m.bundle = make_bundle(std::move(schema), std::move(transforms));
  }
  catch (Error const &e)
  {
    fail(ErrorKind::corruption, std::string("model file: ") + e.what());
  }

  m.arch.enc_h1    = r.u64();
  m.arch.enc_h2    = r.u64();
  m.arch.latent    = r.u64();
  m.arch.dec_h1    = r.u64();
  m.arch.dec_h2    = r.u64();
  m.conditioning   = r.u8() != 0;

  // Re-deriving the expected shapes catches payloads that decode but do not
  // describe a consistent network.
  Model const shape = init_model(m.bundle, m.arch, m.conditioning, 0);
  auto const  nparams = r.count(8 + 16);
  if (nparams != shape.params.size())
  {
    fail(ErrorKind::corruption, "model file: parameter count mismatch");
  }
  for (std::uint64_t i = 0; i < nparams; ++i)
  {
    auto       name = r.str();
    auto const rows = r.u64();
    auto const cols = r.u64();
    auto const &expected = shape.params[i];
    if (name != expected.name || rows != static_cast<std::uint64_t>(expected.value.rows()) ||
        cols != static_cast<std::uint64_t>(expected.value.cols()))
    {
      fail(ErrorKind::corruption, "model file: parameter '" + name + "' has unexpected shape");
    }
    grad::Matrix value(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index rr = 0; rr < value.rows(); ++rr)
    {
      for (Eigen::Index cc = 0; cc < value.cols(); ++cc)
      {
        value(rr, cc) = r.f64();
      }
    }
    m.params.add(std::move(name), std::move(value));
  }

  auto const nprod = r.count(16);
  for (std::uint64_t i = 0; i < nprod; ++i)
  {
    Product p;
    p.id           = r.str();
    auto const nc  = r.count(9);
    for (std::uint64_t j = 0; j < nc; ++j)
    {
      auto name = r.str();
      p.conditions.emplace(std::move(name), read_cell(r));
    }
    m.catalog.push_back(std::move(p));
  }
  if (!r.done())
  {
    fail(ErrorKind::corruption, "model file: trailing bytes after payload");
  }
  return m;
}

std::uint32_t crc_of(std::vector<std::uint8_t> const &payload)
{
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in pieces.
  std::size_t pos = 0;
  while (pos < payload.size())
  {
    auto const chunk = static_cast<uInt>(std::min<std::size_t>(payload.size() - pos, 1U << 30U));
    crc              = crc32(crc, payload.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(Model const &model)
{
  auto const payload = payload_of(model);
  Writer     header;
  for (char c : kMagic)
  {
    header.u8(static_cast<std::uint8_t>(c));
  }
  header.u32(kModelFormatVersion);
  header.u32(crc_of(payload));
  header.u64(payload.size());
  auto out = header.take();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Model deserialize_model(std::vector<std::uint8_t> const &bytes)
{
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
  {
    fail(ErrorKind::corruption, "model file: bad magic bytes (expected \"CTVM\")");
  }
  Reader header(bytes.data() + 4, kHeaderSize - 4);
  auto const version = header.u32();
  auto const crc     = header.u32();
  auto const size    = header.u64();
  if (version != kModelFormatVersion)
  {
    fail(ErrorKind::version, "model file: format version " + std::to_string(version) +
                                 " is not supported by this build (version " +
                                 std::to_string(kModelFormatVersion) + ")");
  }
  if (size != bytes.size() - kHeaderSize)
  {
    fail(ErrorKind::corruption, "model file: payload size mismatch");
  }
  std::vector<std::uint8_t> payload(bytes.begin() + kHeaderSize, bytes.end());
  if (crc_of(payload) != crc)
  {
    fail(ErrorKind::corruption, "model file: checksum mismatch");
  }
  Reader r(payload.data(), payload.size());
  return model_from_payload(r);
}

void save_model(Model const &model, std::string const &path)
{
  auto const    bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
  {
    fail(ErrorKind::io, "write to '" + path + "' failed");
  }
}

Model load_model(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try
  {
    return deserialize_model(bytes);
  }
  catch (Error const &e)
  {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string model_id(Model const &model)
{
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc_of(payload_of(model)));
  return std::string("ctvm-") + buf;
}

}  // namespace ctvae
