#include "d2d/coalition.hpp"

#include "d2d/types.hpp"

namespace d2d {

namespace {

Coalition::Mask bit_for(int user) {
  if (user < 0 || user >= Coalition::kMaxUsers) {
    throw ConfigError("user index " + std::to_string(user) + " outside [0, 63)");
  }
  return Coalition::Mask{1} << user;
}

}  // namespace

Coalition::Coalition(std::initializer_list<int> users) {
  for (int u : users) mask_ |= bit_for(u);
}

Coalition Coalition::from_members(std::span<const int> users) {
  Mask m = 0;
  for (int u : users) m |= bit_for(u);
  return Coalition(m);
}

Coalition Coalition::all(int n_users) {
  if (n_users < 0 || n_users > kMaxUsers) {
    throw CapExceeded("coalition bitmask supports at most 63 users");
  }
  return Coalition(n_users == 64 ? ~Mask{0} : (Mask{1} << n_users) - 1);
}

Coalition Coalition::singleton(int user) { return Coalition(bit_for(user)); }

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for_each([&](int u) { out.push_back(u); });
  return out;
}

std::string Coalition::to_string() const {
  std::string s = "{";
  bool first = true;
  for_each([&](int u) {
    if (!first) s += ",";
    s += std::to_string(u + 1);
    first = false;
  });
  return s + "}";
}

}  // namespace d2d
