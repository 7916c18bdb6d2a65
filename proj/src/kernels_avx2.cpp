// AVX2 variant of the machine-hour component kernel. Compiled with -mavx2 in
// its own translation unit; callers reach it through runtime dispatch only.
//
// The operation sequence matches components_scalar exactly (same mul/add/sub/
// div per element, no FMA), so results are bit-identical to the reference.

#include "fleetmeter/kernels.hpp"

#if defined(FLEETMETER_HAVE_AVX2_KERNEL)

#include <immintrin.h>

namespace fleetmeter::kernels {

void components_avx2(const MachineHourView& in, const ComponentArrays& out) {
    const std::size_t n = in.n;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ph = _mm256_loadu_pd(in.p_host + i);
        const __m256d pa = _mm256_loadu_pd(in.p_accel + i);
        const __m256d tt = _mm256_loadu_pd(in.t_total + i);
        const __m256d ti = _mm256_loadu_pd(in.t_idle + i);
        const __m256d pi = _mm256_loadu_pd(in.p_idle + i);
        const __m256d pue = _mm256_loadu_pd(in.pue + i);

        const __m256d pt = _mm256_add_pd(ph, pa);
        const __m256d base = _mm256_mul_pd(pt, tt);
        const __m256d idle = _mm256_mul_pd(pi, ti);
        const __m256d active = _mm256_sub_pd(base, idle);

        // p_total == 0 lanes take a 0 ratio instead of the 0/0 division.
        const __m256d nonzero = _mm256_cmp_pd(pt, zero, _CMP_NEQ_OQ);
        const __m256d host_ratio =
            _mm256_and_pd(_mm256_div_pd(ph, pt), nonzero);
        const __m256d accel_ratio =
            _mm256_and_pd(_mm256_div_pd(pa, pt), nonzero);

        _mm256_storeu_pd(out.total + i, _mm256_mul_pd(base, pue));
        _mm256_storeu_pd(out.overhead + i, _mm256_mul_pd(base, _mm256_sub_pd(pue, one)));
        _mm256_storeu_pd(out.idle + i, idle);
        _mm256_storeu_pd(out.active_host + i, _mm256_mul_pd(active, host_ratio));
        _mm256_storeu_pd(out.active_accel + i, _mm256_mul_pd(active, accel_ratio));
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

#endif // FLEETMETER_HAVE_AVX2_KERNEL
