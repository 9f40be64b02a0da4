"""Forecast a growing diurnal tenant and apply the threshold scaling rule.

    python3 demos/forecast_scaling.py [quota]
"""

import sys

from abase_lite import autoscale as asc
from abase_lite.forecast import forecast, mape
from abase_lite.synthetic import diurnal_growth_series


def main(q_t=1050.0):
    full = diurnal_growth_series(37, 400, 0.3, 0.03)
    hist, future = full[:720], full[720:]
    res = forecast(hist)
    print(f"history peak {hist.max():.1f}, true next-week peak {future.max():.1f}")
    print(f"forecast peak {res.u_max:.1f}, period {res.detected_period} h, MAPE {mape(future, res.forecast):.4f}")
    print(f"weights {res.weights}")
    dec = asc.decide(asc.ScalingState("t1", q_t, 10), res.u_max, 0.0)
    print(f"Q_T {q_t:g}: {dec.action} -> {dec.new_q_t:.1f} (Q_P {dec.new_q_p:.1f}, partitions {dec.new_n})")


if __name__ == "__main__":
    main(*(float(a) for a in sys.argv[1:2]))
