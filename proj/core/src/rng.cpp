#include "medzisc/rng.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <numeric>
#include <utility>

namespace medzisc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t component : path) {
        h = splitmix64(h ^ splitmix64(component));
    }
    return h;
}

std::vector<std::size_t> random_permutation(std::size_t n, Engine& engine) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(engine)]);
    }
    return order;
}

}  // namespace medzisc
