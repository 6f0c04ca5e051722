#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

// XCDR1 little-endian (encapsulation 0x0001) reader and writer. Alignment is
// relative to the first byte after the 4-byte encapsulation header.

namespace agrisim::cdr {

static_assert(std::endian::native == std::endian::little, "CDR codec assumes a little-endian host");

inline constexpr std::array<std::uint8_t, 4> kEncapsulationLE{0x00, 0x01, 0x00, 0x00};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename T>
concept Primitive = std::is_arithmetic_v<T>;

class Writer {
 public:
  Writer() { buf_.assign(kEncapsulationLE.begin(), kEncapsulationLE.end()); }

  void align(std::size_t n) {
    const std::size_t body = buf_.size() - 4;
    buf_.resize(buf_.size() + (n - body % n) % n, 0);
  }

  template <Primitive T>
  void put(T v) {
    if constexpr (std::is_same_v<T, bool>) {
      buf_.push_back(v ? 1 : 0);
    } else {
      align(sizeof(T));
      const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
      buf_.insert(buf_.end(), p, p + sizeof(T));
    }
  }

  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size() + 1));
    buf_.insert(buf_.end(), s.begin(), s.end());
    buf_.push_back(0);
  }

  template <Primitive T, std::size_t N>
  void put_array(const std::array<T, N>& a) {
    for (const T& v : a) put(v);
  }

  template <Primitive T>
  void put_sequence(const std::vector<T>& v) {
    put(static_cast<std::uint32_t>(v.size()));
    if (v.empty()) return;
    if constexpr (sizeof(T) > 1) align(sizeof(T));
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    buf_.insert(buf_.end(), p, p + v.size() * sizeof(T));
  }

  std::vector<std::uint8_t> take() && { return std::move(buf_); }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : data_(bytes) {
    if (data_.size() < 4) throw DecodeError("payload shorter than encapsulation header", 0);
    if (data_[0] == 0x00 && data_[1] == 0x00) throw DecodeError("big-endian CDR encapsulation is not supported", 0);
    if (data_[0] != 0x00 || data_[1] != 0x01) throw DecodeError("unknown CDR encapsulation", 0);
    pos_ = 4;
  }

  std::size_t offset() const { return pos_; }

  void align(std::size_t n) {
    const std::size_t body = pos_ - 4;
    const std::size_t pad = (n - body % n) % n;
    need(pad);
    pos_ += pad;
  }

  template <Primitive T>
  T get() {
    if constexpr (std::is_same_v<T, bool>) {
      need(1);
      const std::uint8_t b = data_[pos_];
      if (b > 1) throw DecodeError("invalid boolean", pos_);
      ++pos_;
      return b == 1;
    } else {
      align(sizeof(T));
      need(sizeof(T));
      T v;
      std::memcpy(&v, data_.data() + pos_, sizeof(T));
      pos_ += sizeof(T);
      return v;
    }
  }

  std::string get_string() {
    const std::size_t at = pos_;
    const auto len = get<std::uint32_t>();
    if (len == 0) throw DecodeError("string length must include terminator", at);
    need(len);
    if (data_[pos_ + len - 1] != 0) throw DecodeError("string missing NUL terminator", pos_ + len - 1);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len - 1);
    pos_ += len;
    return s;
  }

  template <Primitive T, std::size_t N>
  std::array<T, N> get_array() {
    std::array<T, N> a;
    for (T& v : a) v = get<T>();
    return a;
  }

  template <Primitive T>
  std::vector<T> get_sequence() {
    const std::size_t at = pos_;
    const auto n = get<std::uint32_t>();
    if (n > (data_.size() - pos_) / sizeof(T)) throw DecodeError("sequence length exceeds payload", at);
    std::vector<T> v(n);
    if (n == 0) return v;
    if constexpr (sizeof(T) > 1) align(sizeof(T));
    need(n * sizeof(T));
    std::memcpy(v.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }

  /// Accepts up to three zero padding bytes after the last field.
  void finish() const {
    const std::size_t rest = data_.size() - pos_;
    if (rest > 3) throw DecodeError("unexpected trailing bytes", pos_);
    for (std::size_t i = pos_; i < data_.size(); ++i) {
      if (data_[i] != 0) throw DecodeError("non-zero trailing padding", i);
    }
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw DecodeError("truncated payload", pos_);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace agrisim::cdr
