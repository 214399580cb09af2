// kernel_cache.hpp: memoized influence kernels, shareable between sweep workers
//
// Text format (one kernel per line, '#' lines are comments):
//
//   <bath_hash:16 hex digits> <dt_ps> <memory> <re tail> <im tail> <re eta_0> <im eta_0> ... <re eta_m> <im eta_m>
//
// `tail` is the summed coefficient of the lags beyond the memory (default
// horizon). All floating-point fields are C99 hexadecimal literals (printf "%a"), so a
// save/load cycle reproduces every coefficient bit for bit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <shared_mutex>
#include <tuple>

#include "biexsim/bath.hpp"

namespace biexsim {

class KernelCache {
public:
    /// Returns the cached kernel or computes and stores it. Concurrent readers
    /// share the lock; the first caller for a new key computes it.
    InfluenceKernel get(const PhononBath& bath, double dt_ps, int memory);

    void insert(std::uint64_t bath_key, const InfluenceKernel& kernel);
    std::size_t size() const;
    void clear();

    void save(const std::filesystem::path& path) const;
    /// Merges the kernels stored in `path`; returns how many were read.
    std::size_t load(const std::filesystem::path& path);

    static KernelCache& global();

private:
    using Key = std::tuple<std::uint64_t, std::uint64_t, int>;  // bath hash, dt bits, memory
    static Key make_key(std::uint64_t bath_key, double dt_ps, int memory);

    mutable std::shared_mutex mutex_;
    std::map<Key, InfluenceKernel> kernels_;
};

}  // namespace biexsim
