#include "d2d/coalition.hpp"

#include <doctest.h>

using d2d::Coalition;

TEST_SUITE("coalition") {
  TEST_CASE("set algebra") {
    const Coalition a{0, 2, 3};
    const Coalition b{2, 5};
    CHECK((a | b) == Coalition{0, 2, 3, 5});
    CHECK((a & b) == Coalition{2});
    CHECK((a - b) == Coalition{0, 3});
    CHECK(a.without(2) == Coalition{0, 3});
    CHECK(a.size() == 3);
    CHECK(a.front() == 0);
    CHECK(Coalition().front() == -1);
    CHECK(Coalition{2}.subset_of(a));
    CHECK_FALSE(b.subset_of(a));
    CHECK(a.intersects(b));
    CHECK_FALSE(Coalition{1}.intersects(a));
  }

  TEST_CASE("members are increasing and printed 1-based") {
    const Coalition a{4, 1, 3};
    CHECK(a.members() == std::vector<int>{1, 3, 4});
    CHECK(a.to_string() == "{2,4,5}");
    CHECK(Coalition().to_string() == "{}");
    std::vector<int> seen;
    a.for_each([&](int i) { seen.push_back(i); });
    CHECK(seen == a.members());
  }

  TEST_CASE("construction helpers agree") {
    const std::vector<int> users{0, 1, 2};
    CHECK(Coalition::from_members(users) == Coalition::all(3));
    CHECK(Coalition::singleton(5).mask() == (1ULL << 5));
    CHECK(Coalition::all(0).empty());
    CHECK(Coalition::all(63).size() == 63);
  }

  TEST_CASE("front-member ordering") {
    d2d::ByFrontMember less;
    CHECK(less(Coalition{0, 5}, Coalition{1}));
    CHECK_FALSE(less(Coalition{3}, Coalition{2, 4}));
  }
}
