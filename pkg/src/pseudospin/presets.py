"""Built-in configurations that regenerate the lab sweeps at desk scale."""

_SETUP = """
[setup]
wavelength = 632.8
theta_i = "30 deg"
n = 1.515
sigma = 27.0
"""

PRESETS = {
    # contrast against post-selection angle
    "fig3": _SETUP + """
[sweep]
kind = "theta"
start = -0.1
stop = 0.1
num = 41

[source]
post_rate = 50000.0
window = 100.0

[run]
trials = 10
""",
    # two minimum photon numbers at a 10 ms window
    "fig4": _SETUP + """
[sweep]
kind = "n_photons"
grid = [500, 1500]
theta = 0.01

[source]
window = 10.0

[run]
trials = 100
""",
    # integration time at a 50 kHz post-selected rate
    "fig5": _SETUP + """
[sweep]
kind = "window"
grid = [10.0, 100.0, 1000.0]
theta = 0.01

[source]
post_rate = 50000.0

[run]
trials = 100
""",
    # precision against photon number
    "fig6": _SETUP + """
[sweep]
kind = "n_photons"
grid = [500, 1500, 5000, 15000, 50000]
theta = 0.01

[source]
window = 100.0

[run]
trials = 1000
""",
}


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
