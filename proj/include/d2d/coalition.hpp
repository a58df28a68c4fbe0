#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace d2d {

/// A set of users, stored as a bitmask over 0-based user indices.
///
/// Equality is structural and iteration is always in increasing user order,
/// so a Coalition is its own canonical form. At most 63 users are supported.
class Coalition {
 public:
  using Mask = std::uint64_t;
  static constexpr int kMaxUsers = 63;

  constexpr Coalition() = default;
  constexpr explicit Coalition(Mask mask) : mask_(mask) {}
  Coalition(std::initializer_list<int> users);

  static Coalition from_members(std::span<const int> users);
  static Coalition all(int n_users);
  static Coalition singleton(int user);

  [[nodiscard]] constexpr Mask mask() const { return mask_; }
  [[nodiscard]] constexpr bool empty() const { return mask_ == 0; }
  [[nodiscard]] constexpr int size() const { return std::popcount(mask_); }
  [[nodiscard]] constexpr bool contains(int user) const {
    return user >= 0 && user < kMaxUsers && ((mask_ >> user) & 1U) != 0;
  }
  /// Smallest member; -1 when empty.
  [[nodiscard]] constexpr int front() const {
    return mask_ == 0 ? -1 : std::countr_zero(mask_);
  }
  [[nodiscard]] constexpr bool subset_of(Coalition other) const {
    return (mask_ & ~other.mask_) == 0;
  }
  [[nodiscard]] constexpr bool intersects(Coalition other) const {
    return (mask_ & other.mask_) != 0;
  }

  [[nodiscard]] std::vector<int> members() const;

  template <typename F>
  void for_each(F&& f) const {
    for (Mask m = mask_; m != 0; m &= m - 1) f(std::countr_zero(m));
  }

  constexpr Coalition operator|(Coalition o) const { return Coalition(mask_ | o.mask_); }
  constexpr Coalition operator&(Coalition o) const { return Coalition(mask_ & o.mask_); }
  /// Set difference.
  constexpr Coalition operator-(Coalition o) const { return Coalition(mask_ & ~o.mask_); }
  Coalition without(int user) const { return *this - singleton(user); }

  constexpr bool operator==(const Coalition&) const = default;

  /// Human-facing form with 1-based ids, e.g. "{1,2,3}".
  [[nodiscard]] std::string to_string() const;

 private:
  Mask mask_ = 0;
};

/// Orders disjoint coalitions by their smallest member.
struct ByFrontMember {
  bool operator()(Coalition a, Coalition b) const {
    if (a.front() != b.front()) return a.front() < b.front();
    return a.mask() < b.mask();
  }
};

}  // namespace d2d
