"""Reference values frozen from tests/oracles/generate.py (mpmath, 50 digits)."""

PHI_MINUS_SQRT10 = 0.00078270112900127484
PHI_MINUS_1_959964 = 0.024999999096442402
PHI_MINUS_1 = 0.15865525393145705
TAIL_SERIES_SQRT10_N0 = 0.00085003666025203418
TAIL_SERIES_SQRT10_N1 = 0.00076503299422683076
CHI2_CDF_1_10 = 0.00017211562995584078
CHI2_SF_20_10 = 0.029252688076961073
F_CDF_1_1_10 = 0.65910686769794013
SINGLE_100_1_10 = 0.14500775309040459
SINGLE_10_1_5 = 0.2264314249084522
BATCH_100_1_10_10 = 0.00103424185436993
NCF_10_1_10_10 = 0.47156044236049294
NCF_10_1_10_100 = 0.000000021665628973012946
NCF_20_1_20_50 = 0.015643068506412506
NCF_1_1_10_10 = 0.016389494320145246
NCF_1_1_20_50 = 0.00000000094949995743377551
NCF_1_1_10_100 = 0.00000000000000000079591454035364863
NCF_3_5_7_2_5 = 0.80530928016066103
CHEBYSHEV_0_1_4_1_16_2 = 0.48412291827592711
