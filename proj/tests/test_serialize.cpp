#include <doctest.h>

#include <sstream>

#include <fracperc/serialize.hpp>

#include "testutil.hpp"

using namespace fracperc;

TEST_CASE("root-only tree: header plus one zero bitmask") {
    auto tree = RealizationTree::sample(homogeneous_spec(2, 2, 0.0), 1, 5);
    std::ostringstream os(std::ios::binary);
    serialize_tree(tree, os);
    const std::string bytes = os.str();
    REQUIRE(bytes.size() == 4 + 2 + 2 + 4 + 8 + 1);
    CHECK(bytes.substr(0, 4) == "FPT1");
    CHECK(static_cast<unsigned char>(bytes.back()) == 0);
}

TEST_CASE("full depth-1 tree over 4 cells: bitmask 1111") {
    auto tree = RealizationTree::sample(homogeneous_spec(2, 2, 1.0), 1, 5);
    std::ostringstream os(std::ios::binary);
    serialize_tree(tree, os);
    const std::string bytes = os.str();
    REQUIRE(bytes.size() == 21);
    CHECK(static_cast<unsigned char>(bytes[20]) == 0x0f);
}

TEST_CASE("round-trip is bit-exact on the kept predicate and re-serialization") {
    testutil::Random rng(3);
    for (int rep = 0; rep < 16; ++rep) {
        // includes cell counts past 64 bits (e.g. d=2 M=9, d=3 M=3)
        const int M = 2 + static_cast<int>(rng.integer(8));
        const int d = 1 + static_cast<int>(rng.integer(3));
        const int cells = RetentionSpec::cells_per_level(d, M);
        auto spec = homogeneous_spec(d, M, rng.uniform(0.5, 4.0) / cells);  // bounded offspring
        auto tree = RealizationTree::sample(spec, 3, rng.integer(1u << 30));

        std::ostringstream os(std::ios::binary);
        serialize_tree(tree, os);
        std::istringstream is(os.str(), std::ios::binary);
        auto back = deserialize_tree(is);

        CHECK(back.d() == tree.d());
        CHECK(back.M() == tree.M());
        CHECK(back.depth() == tree.depth());
        CHECK(back.seed() == tree.seed());
        for (int n = 0; n <= tree.depth(); ++n) CHECK(back.survival_coords(n) == tree.survival_coords(n));

        std::ostringstream os2(std::ios::binary);
        serialize_tree(back, os2);
        CHECK(os.str() == os2.str());
    }
}

TEST_CASE("bad magic and truncation raise") {
    auto tree = RealizationTree::sample(homogeneous_spec(2, 2, 0.8), 3, 9);
    std::ostringstream os(std::ios::binary);
    serialize_tree(tree, os);
    std::string bytes = os.str();

    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream bad_is(bad, std::ios::binary);
    CHECK_THROWS_AS(deserialize_tree(bad_is), std::runtime_error);

    std::istringstream short_is(bytes.substr(0, bytes.size() - 1), std::ios::binary);
    CHECK_THROWS_AS(deserialize_tree(short_is), std::runtime_error);
}

TEST_CASE("deserialized trees refuse lazy deepening but answer queries") {
    auto tree = RealizationTree::sample(homogeneous_spec(1, 3, 0.9), 3, 77);
    std::ostringstream os(std::ios::binary);
    serialize_tree(tree, os);
    std::istringstream is(os.str(), std::ios::binary);
    auto back = deserialize_tree(is);
    CHECK_FALSE(back.rng_backed());
    CHECK_THROWS_AS(back.ensure_depth(5), std::logic_error);
    CHECK(back.count(3) == tree.count(3));
}
