"""End-to-end behavior of the 200%-overload systems."""
import numpy as np

from scma.channel import block_rng, draw_frame_block
from scma.detector import MpaConfig, hard_decision, mpa_detect_batch
from scma.fixtures import load_codebook
from scma.montecarlo import estimate_ser
from scma.structure import derive_8x4


class Test12x6:
    def test_noiseless_decoding_is_exact(self, table5):
        symbols, _, y = draw_frame_block(table5, "awgn", 0.0, 256, block_rng(70, 0, 0))
        decided = hard_decision(mpa_detect_batch(y, table5, None, 1e-4, MpaConfig()))
        assert np.array_equal(decided, symbols)

    def test_clean_run_at_high_snr(self, table5):
        est = estimate_ser(table5, 60.0, "awgn", frames=500, seed=6)
        assert est.ser == 0.0

    def test_moderate_snr_operating_point(self, table5):
        est = estimate_ser(table5, 12.0, "awgn", frames=20000, seed=6)
        assert 1e-4 < est.ser < 1e-2


class Test8x4Extension:
    def test_noiseless_decoding_is_exact(self, table3):
        ext = derive_8x4(table3)
        symbols, _, y = draw_frame_block(ext, "awgn", 0.0, 400, block_rng(77, 0, 0))
        decided = hard_decision(mpa_detect_batch(y, ext, None, 1e-4, MpaConfig()))
        assert np.array_equal(decided, symbols)

    def test_four_cycle_graph_underperforms_girth_six_in_fading(self, table3):
        # same 200% overloading, but the 8x4 factor graph contains 4-cycles
        ext = derive_8x4(table3)
        twelve = load_codebook("table6_fading_12x6")
        ext_est = estimate_ser(ext, 18.0, "rayleigh", frames=30000, seed=5)
        twelve_est = estimate_ser(twelve, 18.0, "rayleigh", frames=20000, seed=7)
        assert ext_est.symbol_errors > 100 and twelve_est.symbol_errors > 100
        assert twelve_est.ser < ext_est.ser
