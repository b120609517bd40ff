"""Check a closed-form gap density against a simulated stream.

When traffic is sparse, most interrupt groups hold a single packet and both
neighboring interrupts fire on the packet timer.  The gap between two such
interrupts equals the packet gap conditioned on exceeding the timer, which
by memorylessness is exactly the timer-shifted exponential.  This demo
measures a sparse stream, histograms those single-pair gaps, and prints
them next to the closed form.  It then recovers the traffic's mean packet
gap from the measurements alone with both estimators.

Run:  python3 demos/density_and_estimation.py
"""

import numpy as np

from icmeas import (
    GapDistParams,
    HicConfig,
    PoissonConfig,
    TransferConfig,
    estimate_lambda_ratio,
    estimate_lambda_single_pairs,
    gen_poisson,
    measure,
    pdf_shifted_exp,
)

US = 1000


def main() -> None:
    mean_gap_ns = 50_000.0
    hic = HicConfig(packet_timer_ns=30 * US, absolute_timer_ns=300 * US)
    trace = gen_poisson(
        PoissonConfig(
            mean_gap_ns=mean_gap_ns,
            duration_ns=30_000_000_000,
            seed=11,
            size_bytes=500,
        )
    )
    series = measure(trace, TransferConfig(), hic)
    print(f"{len(trace)} packets coalesced into {len(series)} interrupts")

    single = series.count == 1
    pair = single[1:] & single[:-1]
    gaps = np.diff(series.m_ns)[pair].astype(float)
    print(f"{len(gaps)} gaps between adjacent single-packet interrupts")

    params = GapDistParams(lambda_ns=mean_gap_ns, bound_ns=hic.packet_timer_ns)
    edges = np.arange(30 * US, 330 * US, 20 * US, dtype=float)
    observed, _ = np.histogram(gaps, bins=edges, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    model = pdf_shifted_exp(centers, params)

    print("\nsingle-pair gap density vs timer-shifted exponential:")
    print("   gap(us)   observed      model")
    for c, o, m in zip(centers, observed, model):
        print(f"  {c / US:8.0f}   {o:.3e}  {m:.3e}")

    est = estimate_lambda_ratio(series)
    print(f"\nratio estimator:        {est.value_ns / US:6.2f} us "
          f"(true {mean_gap_ns / US:.2f} us, n={est.sample_count})")
    est = estimate_lambda_single_pairs(series, hic.packet_timer_ns)
    print(f"single-pair estimator:  {est.value_ns / US:6.2f} us "
          f"(true {mean_gap_ns / US:.2f} us, n={est.sample_count})")


if __name__ == "__main__":
    main()
