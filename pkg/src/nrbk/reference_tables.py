"""Golden reference values and gate constants for the regression harness.

The kernel samples are reference values for the circular-boundary kernel
at radius 3 and speed 5; the convergence blocks are reference errors for
the modal solver runs that the CLI reproduces.  Values are stored exactly
as published so relative-error columns are meaningful.
"""

import math

# sigma_n(t) samples: mode -> (value at t=0.1, value at t=2)
KERNEL_SAMPLE_RADIUS = 3.0
KERNEL_SAMPLE_SPEED = 5.0
KERNEL_SAMPLE_TIMES = (0.1, 2.0)
KERNEL_SAMPLES = {
    0: (5.922023678764810e-2, 1.127355852971518e-2),
    1: (-1.770775252065292e-1, -1.849758830245009e-2),
    2: (-8.766785435408012e-1, -3.516167498630298e-3),
    3: (-2.012014067208546, 6.186828109004313e-3),
    4: (-3.538153424430011, -4.319820513209325e-3),
    5: (-5.394296605508512, 2.652114252130534e-3),
    6: (-7.505798337812085, -1.628640292879232e-3),
    7: (-9.786660490985828, 1.032611050422504e-3),
    8: (-12.14241492386835, -6.793719076424341e-4),
    9: (-14.47330651171318, 4.628600071971645e-4),
}
KERNEL_SAMPLE_GATE = 1e-8

# boundary-residual experiment: four (omega, b) columns, shared time grid
RESIDUAL_CASES = ((10 * math.pi, 2.22), (10 * math.pi, 2.75),
                  (20 * math.pi, 2.38), (20 * math.pi, 2.87))
RESIDUAL_TIMES = (0.5, 1.0, 5.0, 10.0)
RESIDUAL_MODES = 32          # highest retained angular mode
RESIDUAL_PULSE_POWER = 2     # p in sin^p(omega t)
RESIDUAL_GATE = 1e-9         # gate on the summed residual E2

# Dirichlet data shared by all solver experiments
DATA_AMPLITUDE = 10.0
DATA_DECAY = 0.1
DATA_SOURCE_X = 2.1
DATA_SOURCE_Y = 2.1
INNER_RADIUS = 2.0
WAVE_SPEED = 5.0

# temporal-convergence experiment: errors and observed orders per time,
# rows are (dt, max-mode L2 error, order, max-mode Linf error, order)
TIME_CONV_MODES = 15
TIME_CONV_RADIUS = 5.0
TIME_CONV_OMEGA = math.pi
TIME_CONV_PULSE_POWER = 6
TIME_CONV_SPACE_ORDER = 50
TIME_CONV_STEPS = (1e-3, 5e-4, 1e-4, 5e-5)
TIME_CONV_TIMES = (1.0, 2.0, 3.0, 4.0)
TIME_CONV_REFERENCE = {
    1.0: ((1e-3, 1.21e-05, None, 1.93e-05, None),
          (5e-4, 3.02e-06, 2.00005, 4.83e-06, 1.99994),
          (1e-4, 1.21e-07, 1.99993, 1.93e-07, 1.99986),
          (5e-5, 3.02e-08, 2.00012, 4.83e-08, 1.99906)),
    2.0: ((1e-3, 1.23e-05, None, 2.01e-05, None),
          (5e-4, 3.07e-06, 1.99998, 5.02e-06, 1.99997),
          (1e-4, 1.23e-07, 2.00001, 2.01e-07, 1.99998),
          (5e-5, 3.07e-08, 2.00002, 5.02e-08, 1.99993)),
    3.0: ((1e-3, 1.23e-05, None, 2.01e-05, None),
          (5e-4, 3.07e-06, 2.00007, 5.02e-06, 1.99997),
          (1e-4, 1.23e-07, 1.99997, 2.01e-07, 1.99998),
          (5e-5, 3.07e-08, 2.00007, 5.02e-08, 2.00004)),
    4.0: ((1e-3, 1.23e-05, None, 2.01e-05, None),
          (5e-4, 3.07e-06, 2.00007, 5.02e-06, 1.99997),
          (1e-4, 1.23e-07, 1.99997, 2.01e-07, 1.99998),
          (5e-5, 3.07e-08, 2.00007, 5.02e-08, 2.00004)),
}
ORDER_BAND = (1.95, 2.05)

# spatial-convergence experiment: time -> {N: (L2 error, Linf error)}
SPACE_CONV_STEP = 1e-5
SPACE_CONV_ORDERS = (8, 10, 16, 32)
SPACE_CONV_TIMES = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
SPACE_CONV_REFERENCE = {
    0.5: {8: (2.349e-04, 2.687e-04), 10: (2.253e-05, 2.846e-05),
          16: (8.224e-07, 1.207e-06), 32: (9.229e-09, 1.639e-08)},
    1.0: {8: (3.877e-04, 4.179e-04), 10: (1.708e-05, 2.042e-05),
          16: (1.833e-07, 2.777e-07), 32: (1.959e-09, 2.673e-09)},
    1.5: {8: (3.276e-04, 3.596e-04), 10: (5.965e-06, 7.146e-06),
          16: (3.072e-08, 5.238e-08), 32: (1.508e-09, 1.762e-09)},
    2.0: {8: (4.105e-04, 4.368e-04), 10: (1.092e-05, 1.188e-05),
          16: (7.353e-09, 1.238e-08), 32: (1.237e-09, 2.119e-09)},
    2.5: {8: (3.239e-04, 3.607e-04), 10: (5.724e-06, 6.997e-06),
          16: (2.381e-09, 3.182e-09), 32: (1.488e-09, 1.734e-09)},
    3.0: {8: (4.113e-04, 4.380e-04), 10: (1.095e-05, 1.189e-05),
          16: (1.404e-09, 2.893e-09), 32: (1.227e-09, 2.009e-09)},
    3.5: {8: (3.238e-04, 3.608e-04), 10: (5.747e-06, 7.036e-06),
          16: (1.554e-09, 2.063e-09), 32: (1.488e-09, 1.732e-09)},
    4.0: {8: (4.113e-04, 4.380e-04), 10: (1.095e-05, 1.189e-05),
          16: (1.269e-09, 2.061e-09), 32: (1.227e-09, 2.007e-09)},
}
# gates: decay from N=8 to N=16 at t in {1,2,3,4}, and the N=32 ceiling
SPACE_DROP_MIN = 1e3
SPACE_DROP_TIMES = (1.0, 2.0, 3.0, 4.0)
SPACE_TOP_GATE = 1e-6
