#include "fleetmeter/kernels.hpp"

#include "fleetmeter/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace fleetmeter::kernels {

void components_scalar(const MachineHourView& in, const ComponentArrays& out) {
    for (std::size_t i = 0; i < in.n; ++i) {
        const double p_total = in.p_host[i] + in.p_accel[i];
        const double base = p_total * in.t_total[i];
        const double idle = in.p_idle[i] * in.t_idle[i];
        const double active = base - idle;
        const double host_ratio = p_total != 0.0 ? in.p_host[i] / p_total : 0.0;
        const double accel_ratio = p_total != 0.0 ? in.p_accel[i] / p_total : 0.0;
        out.total[i] = base * in.pue[i];
        out.overhead[i] = base * (in.pue[i] - 1.0);
        out.idle[i] = idle;
        out.active_host[i] = active * host_ratio;
        out.active_accel[i] = active * accel_ratio;
    }
}

std::vector<KernelInfo> available_kernels() {
    std::vector<KernelInfo> list{{"scalar", &components_scalar}};
#if defined(FLEETMETER_HAVE_AVX2_KERNEL)
    if (__builtin_cpu_supports("avx2")) {
        list.push_back({"avx2", &components_avx2});
    }
#endif
#if defined(FLEETMETER_HAVE_NEON_KERNEL)
    list.push_back({"neon", &components_neon});
#endif
    return list;
}

KernelInfo select_kernel(std::string_view name) {
    auto kernels = available_kernels();
    if (name == "auto" || name.empty()) {
        return kernels.back(); // widest variant is listed last
    }
    for (const auto& k : kernels) {
        if (name == k.name) return k;
    }
    throw Error("unknown or unavailable kernel '" + std::string(name) + "'");
}

KernelInfo select_kernel() {
    const char* env = std::getenv("FLEETMETER_KERNEL");
    return select_kernel(env ? std::string_view(env) : std::string_view("auto"));
}

namespace {

constexpr std::size_t kBlock = 4096;

// Neumaier variant of compensated summation over one block.
double neumaier_block(const double* values, std::size_t n) {
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

} // namespace

double block_sum(std::span<const double> values, unsigned workers) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks);

    auto run_range = [&](std::size_t first, std::size_t last) {
        for (std::size_t b = first; b < last; ++b) {
            const std::size_t begin = b * kBlock;
            partial[b] = neumaier_block(values.data() + begin, std::min(kBlock, n - begin));
        }
    };

    if (workers <= 1 || blocks <= 1) {
        run_range(0, blocks);
    } else {
        const unsigned used = static_cast<unsigned>(
            std::min<std::size_t>(workers, blocks));
        std::vector<std::thread> pool;
        pool.reserve(used);
        const std::size_t per = (blocks + used - 1) / used;
        for (unsigned w = 0; w < used; ++w) {
            const std::size_t first = w * per;
            const std::size_t last = std::min(blocks, first + per);
            if (first >= last) break;
            pool.emplace_back(run_range, first, last);
        }
        for (auto& t : pool) t.join();
    }

    // Block partials combine sequentially in block order regardless of how
    // they were produced.
    return neumaier_block(partial.data(), partial.size());
}

unsigned resolve_thread_count() {
    const char* env = std::getenv("FLEETMETER_THREADS");
    if (env != nullptr) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
        // 0 and malformed values fall through to auto
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace fleetmeter::kernels
