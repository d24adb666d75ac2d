"""Values printed for the worked examples, transcribed once and frozen."""

import numpy as np

EX1_SIGNS = [1, -1, -1, -1, 1, -1, -1, -1, 1, 1]
EX2_SIGNS = [1, -1, -1, 1, 1, -1, -1, 1, 1, -1]

EX1_BRANCH = [-18 - 2j, -16 + 5j, -11 + 3j, -10 - 1j, -4 + 2j, -3 + 3j, 3 + 3j, 7 - 2j, 13 - 1j]

# [eps_i] as (top row, bottom row)
EX1_CHARS = [
    ((1, 0, 0, 0), (0, 0, 0, 0)),
    ((1, 0, 0, 0), (1, 0, 0, 0)),
    ((0, 1, 0, 0), (1, 0, 0, 0)),
    ((0, 1, 0, 0), (1, 1, 0, 0)),
    ((0, 0, 1, 0), (1, 1, 0, 0)),
    ((0, 0, 1, 0), (1, 1, 1, 0)),
    ((0, 0, 0, 1), (1, 1, 1, 0)),
    ((0, 0, 0, 1), (1, 1, 1, 1)),
    ((0, 0, 0, 0), (1, 1, 1, 1)),
]
EX1_K = ((1, 1, 1, 1), (0, 1, 0, 1))
EX1_SHIFTED = [
    ((0, 1, 1, 1), (0, 1, 0, 1)),
    ((0, 1, 1, 1), (1, 1, 0, 1)),
    ((1, 0, 1, 1), (1, 1, 0, 1)),
    ((1, 0, 1, 1), (1, 0, 0, 1)),
    ((1, 1, 0, 1), (1, 0, 0, 1)),
    ((1, 1, 0, 1), (1, 0, 1, 1)),
    ((1, 1, 1, 0), (1, 0, 1, 1)),
    ((1, 1, 1, 0), (1, 0, 1, 0)),
    ((1, 1, 1, 1), (1, 0, 1, 0)),
]

# second kind numerators R_{2i-1}, ascending powers of x
EX1_R = [
    [0, 0, 0, 0, 1],
    [0, 0, 0, 217 - 288j, 78 - 20j, 3],
    [0, 0, -(79138 - 82462j), -(15170 - 1652j), 651 - 864j, 156 - 40j, 5],
    [0, 4126332 - 3930980j, 648116 + 911692j, -(237414 - 247386j), -(30340 - 3304j), 1085 - 1440j, 234 - 60j, 7],
]
EX2_R = [
    [0, 0, 0, 0, 1],
    [0, 0, 0, -514, 22, 3],
    [0, 0, 82441, -9204, -1542, 44, 5],
    [0, -4495768, 1012790, 247323, -18408, -2570, 66, 7],
]

EX3_BRANCH = [
    (-4.58931, -4.9092, (2, 3)),
    (-1.17922 - 0.934455j, 1.60505 + 0.430221j, (1, 3)),
    (-1.17922 + 0.934455j, 1.60505 - 0.430221j, (1, 3)),
    (-0.431732 - 2.20256j, 0.309255 - 1.83532j, (2, 3)),
    (-0.431732 + 2.20256j, 0.309255 + 1.83532j, (1, 2)),
    (0.499118 - 1.57527j, -1.80047 + 1.31135j, (1, 2)),
    (0.499118 + 1.57527j, -1.80047 - 1.31135j, (2, 3)),
    (0.812986, -2.42959, (2, 3)),
]
EX3_SEQUENCES = {
    "a": ["1", "1", "3", "3-1", "1-2-3", "3-2", "1-2", "2", "3"],
    "b": ["2", "2", "2", "2-3", "2-3-1", "1-3", "3-1", "1", "1"],
    "c": ["3", "3", "1", "1-2", "3-1-2", "2-1", "2-3", "3", "2"],
}
EX3_K = ((1, 0, 1), (0, 1, 1))

EX1A_U = np.array([-1.182750 + 0.205635j, 0.073714 - 0.038375j, -0.004762 + 0.002674j, 0.000592 - 0.000064j])
EX1B_U = np.array([-1.574832 + 0.029543j, 0.073141 - 0.050092j, -0.003641 + 0.002439j, 0.000890 + 0.000121j])
EX1A_ANCHORS = [3, 4, 6, 7]

EX1A_WP2 = {(1, 1): -6 + 4j, (1, 3): 42 + 53j, (1, 5): 193 + 191j, (1, 7): 446 - 578j}
EX1A_WP3 = {(1, 1, 1): 91.581255 - 159.929002j, (1, 1, 3): 23.849556 - 1665.831810j,
            (1, 1, 5): -6971.970187 - 998.734510j, (1, 1, 7): -5733.795768 - 18693.578334j}
EX1B_WP3 = {(1, 1, 1): -51.390396 - 175.145987j, (1, 1, 3): -1007.385975 - 1486.407403j,
            (1, 1, 5): -3163.745380 + 5334.829741j, (1, 1, 7): 10094.385116 + 25500.899104j}

EX3A_U1 = np.array([-0.270333 - 1.612257j, -1.116879 + 0.562199j, 0.258194 + 0.268653j])
EX3A_U2 = np.array([-0.546310 + 0.440673j, 0.496998 - 0.233192j, 0.028495 - 0.067950j])
EX3B_U = np.array([-0.421105 - 2.303962j, -1.319230 - 1.997581j, -0.176345 + 0.125109j])

EX3A_WP = {(1, 1): 0.059654 + 1.020925j, (1, 2): -0.793416 + 0.889005j, (1, 5): 0.885372 - 3.089764j,
           (2, 2): -0.269700 + 1.472739j, (2, 5): -3.501466 + 10.538856j,
           (1, 1, 1): -2.156576 + 3.543516j, (1, 1, 2): -3.595029 + 2.840859j, (1, 1, 5): 5.656516 - 0.559812j}
EX3B_WP = {(1, 1): -0.497171 - 1.306218j, (1, 2): 0.485105 + 2.618402j, (1, 5): 2.083016 - 2.086324j,
           (2, 2): -2.356414 + 10.869587j, (2, 5): 15.590831 + 2.902800j,
           (1, 1, 1): 1.678988 + 8.731706j, (1, 1, 2): -4.377331 - 0.119524j, (1, 1, 5): 2.198126 + 13.211222j}

# printed routes for the 3a points: branch point ids (0 = infinity), label strings for each
# edge and the label the final arc starts on
EX3A_ROUTES_1 = [([0, 1, 3], "3 3"), ([0, 1, 2, 4, 2, 5], "3 3 1-2 3-2 2"),
                 ([0, 1, 2, 4, 6, 8, 6], "3 3 1-2 3-1 2-3 2-1")]
EX3A_ROUTES_2 = [([0, 1, 2, 4, 6, 8, 7, 5, 3, 1, 3], "3 3 1-2 3-1 2-3 2 3 3 1 1"),
                 ([0, 1, 2, 4, 6, 8, 7, 5, 3, 1, 2, 4, 6, 8, 7, 5, 3, 1, 2, 4, 6, 5],
                  "3 3 1-2 3-1 2-3 2 3 3 1 1 3-1 1-2 1-2 3 2 1 3 2 2-3 2-3 3-1"),
                 ([0, 1, 2, 4, 6, 8, 7, 5, 3, 1, 2, 4, 6], "3 3 1-2 3-1 2-3 2 3 3 1 1 3-1 1-2")]
