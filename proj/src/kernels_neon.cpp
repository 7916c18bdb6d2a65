// NEON variant of the machine-hour component kernel, aarch64 only. Same
// operation sequence as components_scalar; bit-identical results.

#include "fleetmeter/kernels.hpp"

#if defined(FLEETMETER_HAVE_NEON_KERNEL)

#include <arm_neon.h>

namespace fleetmeter::kernels {

void components_neon(const MachineHourView& in, const ComponentArrays& out) {
    const std::size_t n = in.n;
    const float64x2_t zero = vdupq_n_f64(0.0);
    const float64x2_t one = vdupq_n_f64(1.0);

    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t ph = vld1q_f64(in.p_host + i);
        const float64x2_t pa = vld1q_f64(in.p_accel + i);
        const float64x2_t tt = vld1q_f64(in.t_total + i);
        const float64x2_t ti = vld1q_f64(in.t_idle + i);
        const float64x2_t pi = vld1q_f64(in.p_idle + i);
        const float64x2_t pue = vld1q_f64(in.pue + i);

        const float64x2_t pt = vaddq_f64(ph, pa);
        const float64x2_t base = vmulq_f64(pt, tt);
        const float64x2_t idle = vmulq_f64(pi, ti);
        const float64x2_t active = vsubq_f64(base, idle);

        const uint64x2_t eq_zero = vceqq_f64(pt, zero);
        const uint64x2_t nonzero =
            vreinterpretq_u64_u32(vmvnq_u32(vreinterpretq_u32_u64(eq_zero)));
        const float64x2_t host_ratio = vreinterpretq_f64_u64(
            vandq_u64(vreinterpretq_u64_f64(vdivq_f64(ph, pt)), nonzero));
        const float64x2_t accel_ratio = vreinterpretq_f64_u64(
            vandq_u64(vreinterpretq_u64_f64(vdivq_f64(pa, pt)), nonzero));

        vst1q_f64(out.total + i, vmulq_f64(base, pue));
        vst1q_f64(out.overhead + i, vmulq_f64(base, vsubq_f64(pue, one)));
        vst1q_f64(out.idle + i, idle);
        vst1q_f64(out.active_host + i, vmulq_f64(active, host_ratio));
        vst1q_f64(out.active_accel + i, vmulq_f64(active, accel_ratio));
    }

    if (i < n) {
        MachineHourView tail = in;
        tail.p_host += i;
        tail.p_accel += i;
        tail.t_total += i;
        tail.t_idle += i;
        tail.p_idle += i;
        tail.pue += i;
        tail.n = n - i;
        ComponentArrays tail_out{out.total + i, out.overhead + i, out.idle + i,
                                 out.active_host + i, out.active_accel + i};
        components_scalar(tail, tail_out);
    }
}

} // namespace fleetmeter::kernels

#endif // FLEETMETER_HAVE_NEON_KERNEL
