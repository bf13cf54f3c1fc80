#ifndef SDNGAME_BINARY_IO_H_
#define SDNGAME_BINARY_IO_H_

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

// Raw host-order (little-endian on every supported target) scalar I/O for
// the checkpoint formats.
namespace sdngame::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
  requires std::is_arithmetic_v<T>
void Write(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T Read(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("truncated checkpoint");
  return value;
}

inline void WriteMagic(std::ostream& out, const std::array<char, 4>& magic,
                       std::uint32_t version) {
  out.write(magic.data(), magic.size());
  Write<std::uint32_t>(out, version);
}

inline void ExpectMagic(std::istream& in, const std::array<char, 4>& magic,
                        std::uint32_t version) {
  std::array<char, 4> got{};
  in.read(got.data(), got.size());
  if (!in || got != magic) {
    throw FormatError("bad magic, expected " + std::string(magic.data(), 4));
  }
  const auto v = Read<std::uint32_t>(in);
  if (v != version) {
    throw FormatError("unsupported " + std::string(magic.data(), 4) + " version " +
                      std::to_string(v));
  }
}

}  // namespace sdngame::io

#endif  // SDNGAME_BINARY_IO_H_
