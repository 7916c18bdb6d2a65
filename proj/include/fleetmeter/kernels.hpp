#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fleetmeter::kernels {

/// Structure-of-arrays view over a batch of joined machine-hours. All six
/// arrays have length `n`.
struct MachineHourView {
    const double* p_host = nullptr;
    const double* p_accel = nullptr;
    const double* t_total = nullptr;
    const double* t_idle = nullptr;
    const double* p_idle = nullptr;
    const double* pue = nullptr;
    std::size_t n = 0;
};

/// Per-machine-hour energy components, Wh, one slot per input element.
struct ComponentArrays {
    double* total = nullptr;
    double* overhead = nullptr;
    double* idle = nullptr;
    double* active_host = nullptr;
    double* active_accel = nullptr;
};

using KernelFn = void (*)(const MachineHourView&, const ComponentArrays&);

// Reference kernel. Elementwise:
//   p_total      = p_host + p_accel
//   base         = p_total * t_total            (IT energy, Wh)
//   total        = base * pue
//   overhead     = base * (pue - 1)
//   idle         = p_idle * t_idle
//   active       = base - idle
//   active_host  = active * (p_host / p_total), 0 when p_total == 0
//   active_accel = active * (p_accel / p_total), 0 when p_total == 0
// The SIMD variants perform the identical operation sequence and produce
// bit-identical output (the build disables FP contraction).
void components_scalar(const MachineHourView& in, const ComponentArrays& out);

#if defined(__x86_64__) || defined(_M_X64)
#define FLEETMETER_HAVE_AVX2_KERNEL 1
void components_avx2(const MachineHourView& in, const ComponentArrays& out);
#endif

#if defined(__aarch64__)
#define FLEETMETER_HAVE_NEON_KERNEL 1
void components_neon(const MachineHourView& in, const ComponentArrays& out);
#endif

struct KernelInfo {
    const char* name;
    KernelFn fn;
};

// Kernels usable on this CPU, scalar first.
std::vector<KernelInfo> available_kernels();

// Widest available kernel, or the one named by FLEETMETER_KERNEL
// (scalar | avx2 | neon | auto). Unknown or unavailable names raise Error.
KernelInfo select_kernel();
KernelInfo select_kernel(std::string_view name);

// Deterministic reduction: Neumaier-compensated sums over fixed 4096-element
// blocks combined in block order. The result does not depend on the worker
// count, so outputs stay byte-identical under any FLEETMETER_THREADS setting.
double block_sum(std::span<const double> values, unsigned workers = 1);

// Worker count from FLEETMETER_THREADS (0 or unset = hardware concurrency).
unsigned resolve_thread_count();

} // namespace fleetmeter::kernels
