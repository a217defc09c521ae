"""Published root-mean-square error bounds and lambda* values.

Grid ``n = 251, 499, ..., 32003`` with ``s = 100``. These numbers are used
only for comparison reports and tests, never as computational inputs.
Each entry is ``(values per n, rate)``; ``rate`` is ``None`` where no rate
was printed.
"""

GRID = (251, 499, 997, 1999, 4001, 7993, 16001, 32003)
S = 100

PUBLISHED = {
    1: {
        "DCBC": ((6.8e-3, 3.5e-3, 1.8e-3, 9.7e-4, 5.1e-4, 2.7e-4, 1.4e-4, 7.4e-5), 0.93),
        "ICBC": ((7.0e-3, 3.6e-3, 1.9e-3, 1.0e-3, 5.2e-4, 2.7e-4, 1.4e-4, 7.5e-5), 0.93),
        "gamma=i^-1.1": ((3.5e-2, 2.1e-2, 1.3e-2, 7.8e-3, 4.8e-3, 2.9e-3, 1.8e-3, 1.1e-3), 0.71),
        "gamma=i^-2": ((7.5e-3, 4.0e-3, 2.2e-3, 1.2e-3, 6.3e-4, 3.4e-4, 1.9e-4, 1.0e-4), 0.88),
        "gamma(lambda=0.6)": ((8.2e-3, 4.2e-3, 2.2e-3, 1.1e-3, 5.8e-4, 2.9e-4, 1.5e-4, 7.9e-5), 0.95),
        "gamma(lambda=1)": ((1.3e-2, 7.6e-3, 4.3e-3, 2.4e-3, 1.4e-3, 7.8e-4, 4.4e-4, 2.5e-4), 0.82),
    },
    2: {
        "DCBC": ((4.1e-3, 2.1e-3, 1.1e-3, 5.6e-4, 2.9e-4, 1.5e-4, 7.6e-5, 3.9e-5), 0.96),
        "ICBC": ((3.3e-3, 1.7e-3, 8.6e-4, 4.4e-4, 2.2e-4, 1.1e-4, 5.9e-5, 3.0e-5), 0.96),
        "gamma=i^-1.1": ((2.8e-2, 1.7e-2, 1.0e-2, 6.2e-3, 3.8e-3, 2.3e-3, 1.4e-3, 8.7e-4), 0.71),
        "gamma=i^-2": ((5.5e-3, 2.9e-3, 1.6e-3, 8.6e-4, 4.6e-4, 2.5e-4, 1.4e-4, 7.5e-5), 0.88),
        "gamma(lambda=0.6)": ((3.3e-3, 1.7e-3, 8.6e-4, 4.4e-4, 2.2e-4, 1.1e-4, 5.9e-5, 3.0e-5), 0.97),
        "gamma(lambda=1)": ((6.7e-3, 3.6e-3, 2.0e-3, 1.1e-3, 5.8e-4, 3.1e-4, 1.7e-4, 9.3e-5), 0.88),
    },
    3: {
        "DCBC": ((9.9e-2, 5.7e-2, 3.5e-2, 2.1e-2, 1.2e-2, 7.3e-3, 4.3e-3, 2.5e-3), 0.75),
        "ICBC": ((8.3e-2, 5.0e-2, 2.9e-2, 1.7e-2, 1.0e-2, 5.9e-3, 3.5e-3, 2.0e-3), 0.75),
        "gamma=i^-1.1": ((2.0e-1, 1.2e-1, 7.5e-2, 4.6e-2, 2.8e-2, 1.7e-2, 1.0e-2, 6.4e-3), 0.71),
        "gamma=i^-2": ((2.8, 1.5, 8.2e-1, 4.4e-1, 2.4e-1, 1.3e-1, 7.1e-2, 3.9e-2), 0.88),
        "gamma(lambda=0.6)": ((1.6e-1, 8.9e-2, 5.1e-2, 2.8e-2, 1.6e-2, 9.1e-3, 5.0e-3, 2.9e-3), 0.82),
        "gamma(lambda=1)": ((1.2e-1, 7.2e-2, 4.5e-2, 2.8e-2, 1.8e-2, 1.1e-2, 6.7e-3, 4.2e-3), 0.69),
    },
    4: {
        "b=i^-2": ((0.672, 0.668, 0.661, 0.657, 0.652, 0.645, 0.642, 0.637), None),
        "b=0.5^i": ((0.616, 0.615, 0.610, 0.607, 0.604, 0.601, 0.597, 0.594), None),
        "b=0.8^i": ((0.756, 0.744, 0.735, 0.725, 0.715, 0.711, 0.700, 0.696), None),
    },
    5: {
        "DCBC Gamma=B": ((8.6e-3, 4.6e-3, 2.5e-3, 1.3e-3, 6.9e-4, 3.7e-4, 1.9e-4, 1.0e-4), 0.91),
        "DCBC Gamma=l!": ((8.5e-3, 4.5e-3, 2.5e-3, 1.3e-3, 7.0e-4, 3.7e-4, 2.0e-4, 1.1e-4), 0.90),
        "ICBC": ((8.7e-3, 4.6e-3, 2.5e-3, 1.3e-3, 6.8e-4, 3.6e-4, 1.9e-4, 1.0e-4), 0.92),
        "lambda*": ((0.680, 0.673, 0.666, 0.659, 0.655, 0.650, 0.645, 0.640), None),
    },
    6: {
        "DCBC Gamma=B": ((9.2e-3, 5.0e-3, 2.7e-3, 1.5e-3, 7.9e-4, 4.2e-4, 2.3e-4, 1.2e-4), 0.89),
        "DCBC Gamma=l": ((1.1e-2, 5.8e-3, 3.2e-3, 1.7e-3, 9.6e-4, 5.2e-4, 2.8e-4, 1.6e-4), 0.87),
        "ICBC": ((9.7e-3, 5.1e-3, 2.8e-3, 1.5e-3, 8.0e-4, 4.3e-4, 2.3e-4, 1.3e-4), 0.89),
        "lambda*": ((0.692, 0.685, 0.679, 0.673, 0.667, 0.661, 0.656, 0.651), None),
    },
    7: {
        "DCBC Gamma=B": ((4.9e-3, 2.5e-3, 1.3e-3, 6.9e-4, 3.6e-4, 1.9e-4, 9.8e-5, 5.1e-5), 0.94),
        "DCBC Gamma=l!": ((5.0e-3, 2.6e-3, 1.4e-3, 7.2e-4, 3.8e-4, 2.0e-4, 1.0e-4, 5.3e-5), 0.93),
        "ICBC": ((3.8e-3, 2.0e-3, 1.0e-3, 5.3e-4, 2.7e-4, 1.4e-4, 7.2e-5, 3.7e-5), 0.95),
        "lambda*": ((0.619, 0.617, 0.612, 0.608, 0.605, 0.602, 0.597, 0.595), None),
    },
    8: {
        "DCBC Gamma=B": ((5.1e-3, 2.6e-3, 1.4e-3, 7.3e-4, 3.9e-4, 2.0e-4, 1.1e-4, 5.6e-5), 0.93),
        "DCBC Gamma=l": ((5.1e-3, 2.6e-3, 1.4e-3, 7.3e-4, 3.8e-4, 2.0e-4, 1.0e-4, 5.5e-5), 0.93),
        "ICBC": ((4.0e-3, 2.1e-3, 1.1e-3, 5.6e-4, 2.9e-4, 1.5e-4, 7.9e-5, 4.1e-5), 0.95),
        "lambda*": ((0.625, 0.622, 0.618, 0.614, 0.608, 0.604, 0.602, 0.599), None),
    },
}
