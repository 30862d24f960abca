#ifndef PAN_TYPES_H
#define PAN_TYPES_H

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace pan {

// Identifier of an autonomous system. Values at or above kStubBase are
// reserved for the virtual end-host stubs of real ASes.
struct AsId {
  static constexpr std::uint64_t kStubBase = std::uint64_t{1} << 32;

  std::uint64_t value = 0;

  constexpr AsId() = default;
  constexpr explicit AsId(std::uint64_t v) : value(v) {}

  // The virtual customer representing the end hosts of `as`.
  static constexpr AsId StubOf(AsId as) { return AsId(kStubBase + as.value); }

  constexpr bool is_stub() const { return value >= kStubBase; }
  constexpr AsId stub_owner() const { return AsId(value - kStubBase); }

  friend constexpr auto operator<=>(const AsId&, const AsId&) = default;

  // "65000" for real ASes, "@65000" for the end-host stub of AS 65000.
  std::string ToString() const;
};

// Thrown when input violates a documented precondition (negative flow,
// unknown node, malformed record).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a requested flow change cannot be realized, e.g. rerouting
// more traffic than currently exists on a link.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure in one of the text formats; carries the 1-based line.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pan

template <>
struct std::hash<pan::AsId> {
  std::size_t operator()(const pan::AsId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

#endif  // PAN_TYPES_H
