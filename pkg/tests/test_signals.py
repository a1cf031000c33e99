import tempfile
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from scipy.io import wavfile

from filterlab.errors import SignalFileError
from filterlab.signals import (
    read_impulse_response,
    read_wav_pcm16,
    synthetic_echo_path,
    synthetic_speech,
)


class TestWav(unittest.TestCase):
    def test_pcm16_scaled(self):
        with tempfile.TemporaryDirectory() as td:
            p = Path(td) / "s.wav"
            wavfile.write(p, 8000, np.array([0, 16384, -32768, 32767], dtype=np.int16))
            assert_array_equal(read_wav_pcm16(p), [0.0, 0.5, -1.0, 32767 / 32768])

    def test_rejects_stereo_and_float(self):
        with tempfile.TemporaryDirectory() as td:
            stereo = Path(td) / "st.wav"
            wavfile.write(stereo, 8000, np.zeros((10, 2), dtype=np.int16))
            with self.assertRaises(SignalFileError):
                read_wav_pcm16(stereo)
            flt = Path(td) / "f.wav"
            wavfile.write(flt, 8000, np.zeros(10, dtype=np.float32))
            with self.assertRaises(SignalFileError):
                read_wav_pcm16(flt)

    def test_bad_header(self):
        with tempfile.TemporaryDirectory() as td:
            p = Path(td) / "bad.wav"
            p.write_bytes(b"not a wav file at all")
            with self.assertRaises(SignalFileError):
                read_wav_pcm16(p)
            with self.assertRaises(SignalFileError):
                read_wav_pcm16(Path(td) / "missing.wav")


class TestImpulseResponse(unittest.TestCase):
    def test_parse(self):
        with tempfile.TemporaryDirectory() as td:
            p = Path(td) / "ir.txt"
            p.write_text("# echo path\n0.5\n\n-0.25\n1e-3\n", encoding="utf-8")
            assert_array_equal(read_impulse_response(p), [0.5, -0.25, 1e-3])

    def test_errors(self):
        with tempfile.TemporaryDirectory() as td:
            bad = Path(td) / "bad.txt"
            bad.write_text("0.5\nabc\n", encoding="utf-8")
            with self.assertRaises(SignalFileError):
                read_impulse_response(bad)
            empty = Path(td) / "empty.txt"
            empty.write_text("# nothing\n", encoding="utf-8")
            with self.assertRaises(SignalFileError):
                read_impulse_response(empty)
            with self.assertRaises(SignalFileError):
                read_impulse_response(Path(td) / "missing.txt")


class TestSynthetic(unittest.TestCase):
    def test_echo_path(self):
        h = synthetic_echo_path(9, seed=0)
        self.assertEqual(h.shape, (9,))
        self.assertAlmostEqual(float(np.linalg.norm(h)), 1.0, places=12)
        assert_array_equal(h, synthetic_echo_path(9, seed=0))
        self.assertGreater(np.sum(h[:3] ** 2), np.sum(h[-3:] ** 2))

    def test_speech(self):
        s = synthetic_speech(4000, seed=1)
        self.assertEqual(s.shape, (4000,))
        assert_allclose(np.max(np.abs(s)), 0.5)
        self.assertTrue(np.all(np.isfinite(s)))


if __name__ == "__main__":
    unittest.main()
