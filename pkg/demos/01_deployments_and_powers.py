"""Deployments and received powers.

Samples a finite uniform deployment and a Poisson one, looks at the received
powers seen by a user at the center, and checks the closed-form census of
strong links: the number of powers above a level delta is Poisson with mean
pi * density * E|c|^(4/alpha) * delta^(-2/alpha).
"""

import numpy as np

import cransim as cs

rng = np.random.default_rng(1)

# A 500-node deployment at unit density, user at the center.
deployment = cs.sample_uniform_deployment(500, 1.0, rng)
print(f"window side {2 * deployment.window.half_width:.3f}, "
      f"{deployment.n_points} radio heads")

dist = cs.distances(deployment)
print(f"nearest radio head at distance {dist.min():.3f}, farthest {dist.max():.3f}")

# Received powers under Rayleigh fading with path loss exponent 4.
model = cs.FadingModel.rayleigh()
alpha = 4.0
channels = cs.draw_channels(deployment, model, alpha, rng)
powers = np.sort(np.abs(channels.gains) ** 2)[::-1]
print(f"strongest powers: {np.array2string(powers[:5], precision=4)}")
print(f"top-10 share of total power: {powers[:10].sum() / powers.sum():.1%}")

# Census of strong links vs the closed form, averaged over Poisson draws.
moment = cs.fading_moment(model, alpha)
window = cs.Window.square(400.0)
delta = 0.05
counts = []
for _ in range(2000):
    d = cs.sample_hppp(window, 1.0, rng)
    ch = cs.draw_channels(d, model, alpha, rng)
    counts.append(int(np.sum(np.abs(ch.gains) ** 2 > delta)))
expected = cs.expected_count_above(delta, alpha, 1.0, moment)
print(f"links above {delta}: simulated mean {np.mean(counts):.3f}, "
      f"closed form {expected:.3f}")

# The s-th strongest power has an explicit cdf; spot-check the median of g_1.
median = np.median([  # medians of small batches stabilize the estimate
    np.partition(
        np.abs(cs.draw_channels(cs.sample_hppp(window, 1.0, rng), model, alpha, rng).gains) ** 2,
        -1,
    )[-1]
    for _ in range(999)
])
print(f"empirical cdf of g_1 at its sample median: "
      f"{cs.power_order_cdf(float(median), 1, alpha, 1.0, moment):.3f} (want ~0.5)")
