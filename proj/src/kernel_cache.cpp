#include "biexsim/kernel_cache.hpp"

#include <bit>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace biexsim {

namespace {

std::string hex_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%a", value);
    return buffer;
}

double parse_double(const std::string& token, const std::filesystem::path& path, std::size_t line) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + token + "'");
    }
    return value;
}

}  // namespace

KernelCache::Key KernelCache::make_key(std::uint64_t bath_key, double dt_ps, int memory) {
    return {bath_key, std::bit_cast<std::uint64_t>(dt_ps), memory};
}

InfluenceKernel KernelCache::get(const PhononBath& bath, double dt_ps, int memory) {
    const Key key = make_key(bath_hash(bath), dt_ps, memory);
    {
        std::shared_lock lock(mutex_);
        if (auto it = kernels_.find(key); it != kernels_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = kernels_.find(key); it != kernels_.end()) return it->second;
    InfluenceKernel kernel = compute_kernel(bath, dt_ps, memory);
    kernels_.emplace(key, kernel);
    return kernel;
}

void KernelCache::insert(std::uint64_t bath_key, const InfluenceKernel& kernel) {
    std::unique_lock lock(mutex_);
    kernels_.insert_or_assign(make_key(bath_key, kernel.dt_ps, kernel.memory), kernel);
}

std::size_t KernelCache::size() const {
    std::shared_lock lock(mutex_);
    return kernels_.size();
}

void KernelCache::clear() {
    std::unique_lock lock(mutex_);
    kernels_.clear();
}

void KernelCache::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write kernel cache " + path.string());
    out << "# biexsim influence-kernel cache v1\n"
        << "# bath_hash dt_ps memory re(tail) im(tail) re(eta_0) im(eta_0) ... re(eta_memory) im(eta_memory)\n";
    std::shared_lock lock(mutex_);
    for (const auto& [key, kernel] : kernels_) {
        char hash[20];
        std::snprintf(hash, sizeof hash, "%016" PRIx64, std::get<0>(key));
        out << hash << ' ' << hex_double(kernel.dt_ps) << ' ' << kernel.memory << ' '
            << hex_double(kernel.tail.real()) << ' ' << hex_double(kernel.tail.imag());
        for (const Complex& eta : kernel.eta) out << ' ' << hex_double(eta.real()) << ' ' << hex_double(eta.imag());
        out << '\n';
    }
}

std::size_t KernelCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read kernel cache " + path.string());
    std::size_t count = 0;
    std::size_t line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        std::istringstream fields(line);
        std::string hash_token, dt_token;
        int memory = 0;
        if (!(fields >> hash_token >> dt_token >> memory) || memory < 1) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed kernel header");
        }
        InfluenceKernel kernel;
        kernel.dt_ps = parse_double(dt_token, path, line_no);
        kernel.memory = memory;
        std::string re, im;
        if (!(fields >> re >> im)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": missing tail coefficient");
        }
        kernel.tail = {parse_double(re, path, line_no), parse_double(im, path, line_no)};
        while (fields >> re >> im) {
            kernel.eta.emplace_back(parse_double(re, path, line_no), parse_double(im, path, line_no));
        }
        if (kernel.eta.size() != static_cast<std::size_t>(memory) + 1) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(memory + 1) + " coefficients");
        }
        std::uint64_t hash = 0;
        const auto parsed = std::from_chars(hash_token.data(), hash_token.data() + hash_token.size(), hash, 16);
        if (hash_token.size() != 16 || parsed.ec != std::errc{} || parsed.ptr != hash_token.data() + hash_token.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad bath hash '" + hash_token +
                                     "'");
        }
        insert(hash, kernel);
        ++count;
    }
    return count;
}

KernelCache& KernelCache::global() {
    static KernelCache cache;
    return cache;
}

}  // namespace biexsim
