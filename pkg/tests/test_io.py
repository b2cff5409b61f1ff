import io
import struct

import numpy as np
import pytest

from voigtbq.diagnostics import DiagnosticsMonitor, make_record
from voigtbq.dynamics import State
from voigtbq.errors import CheckpointFormatError
from voigtbq.initial import random_bandlimited
from voigtbq.io import (
    MAGIC,
    DiagnosticsWriter,
    checkpoint_read,
    checkpoint_write,
    format_record,
    parse_record,
    read_diagnostics,
    write_diagnostics,
)
from voigtbq.spectral import VoigtParams, make_grid
from voigtbq.timestepper import StepControl, integrate


class TestDiagnosticsFormat:
    def test_rest_record(self):
        grid = make_grid(16)
        rec = make_record(State(grid.zeros(), grid.zeros(), 0.0), VoigtParams(0.5, 1, 1))
        line = format_record(rec)
        assert line.startswith('{"schema": 1, "t": 0, "l2_omega": 0,')
        assert '"bound_slack": null' in line

    def test_seventeen_digits(self):
        grid = make_grid(16)
        rec = make_record(random_bandlimited(grid, 4, 4, seed=1), VoigtParams())
        rec.t = 0.1
        assert '"t": 0.10000000000000001' in format_record(rec)

    def test_two_records_increasing(self, tmp_path):
        grid = make_grid(16)
        path = tmp_path / "d.ndjson"
        params = VoigtParams()
        with DiagnosticsWriter(str(path)) as w:
            mon = DiagnosticsMonitor(params, (1.5,), sink=w)
            integrate(random_bandlimited(grid, 4, 4, seed=2), StepControl(t_end=0.02, dt=0.01), params,
                      observer=mon, observe_every=100)
        recs = read_diagnostics(path)
        assert len(recs) == 2 and recs[1].t > recs[0].t

    def test_writer_rejects_time_going_back(self, tmp_path):
        grid = make_grid(16)
        rec = make_record(State(grid.zeros(), grid.zeros(), 1.0), VoigtParams())
        with DiagnosticsWriter(str(tmp_path / "d.ndjson")) as w:
            w(rec)
            with pytest.raises(ValueError):
                w(rec)

    def test_reserialize_byte_identical(self, tmp_path):
        grid = make_grid(32)
        params = VoigtParams(1, 1, 1)
        path = tmp_path / "d.ndjson"
        with DiagnosticsWriter(str(path)) as w:
            integrate(random_bandlimited(grid, 6, 4, seed=3), StepControl(t_end=0.1, dt=0.01), params,
                      observer=DiagnosticsMonitor(params, (1.5, 2.0), sink=w), observe_every=2)
        original = path.read_text()
        buf = io.StringIO()
        for rec in read_diagnostics(path):
            write_diagnostics(rec, buf)
        assert buf.getvalue() == original

    def test_rejects_non_finite(self):
        grid = make_grid(16)
        rec = make_record(State(grid.zeros(), grid.zeros()), VoigtParams())
        rec.max_u = float("nan")
        with pytest.raises(ValueError):
            format_record(rec)

    def test_schema_check(self):
        with pytest.raises(ValueError):
            parse_record('{"schema": 99}')


class TestCheckpoint:
    def _state(self):
        grid = make_grid(32)
        s = random_bandlimited(grid, 6, 4, seed=5)
        return integrate(s, StepControl(t_end=0.05, dt=0.01), VoigtParams(1, 4 / 3, 2 / 3))

    def test_round_trip_bit_exact(self, tmp_path):
        s = self._state()
        p = VoigtParams(1, 4 / 3, 2 / 3)
        path = tmp_path / "c.chk"
        checkpoint_write(s, p, str(path))
        back, bp = checkpoint_read(str(path))
        assert bp == p and back.t == s.t
        assert back.omega_hat.tobytes() == s.omega_hat.tobytes()
        assert back.theta_hat.tobytes() == s.theta_hat.tobytes()

    def test_rest_state(self, tmp_path):
        grid = make_grid(16)
        s = State(grid.zeros(), grid.zeros(), 0.0)
        checkpoint_write(s, VoigtParams(), str(tmp_path / "r.chk"))
        back, p = checkpoint_read(str(tmp_path / "r.chk"))
        assert not back.omega_hat.any() and not back.theta_hat.any() and p == VoigtParams()

    def test_layout(self, tmp_path):
        grid = make_grid(16)
        w = grid.zeros()
        w[grid.index_of((-5, -5))] = 1 + 2j
        w[grid.index_of((5, 5))] = 1 - 2j
        path = tmp_path / "l.chk"
        checkpoint_write(State(w, grid.zeros(), 0.25), VoigtParams(0.5, 1.5, 0.5), str(path))
        blob = path.read_bytes()
        assert blob[:8] == MAGIC
        version, N, eps, a, b, t = struct.unpack_from("<II4d", blob, 8)
        assert (version, N, eps, a, b, t) == (1, 16, 0.5, 1.5, 0.5, 0.25)
        # K = 5: 11 x 11 table per field; (-5, -5) is the first entry, (5, 5) the last
        assert len(blob) == 48 + 2 * 16 * 121
        assert struct.unpack_from("<2d", blob, 48) == (1.0, 2.0)
        assert struct.unpack_from("<2d", blob, 48 + 16 * 120) == (1.0, -2.0)

    def _written(self, tmp_path):
        path = tmp_path / "c.chk"
        checkpoint_write(self._state(), VoigtParams(), str(path))
        return path

    def test_bad_magic(self, tmp_path):
        path = self._written(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[:8] = b"NOTACHKP"
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointFormatError, match="magic"):
            checkpoint_read(str(path))

    def test_bad_version(self, tmp_path):
        path = self._written(tmp_path)
        blob = bytearray(path.read_bytes())
        blob[8:12] = struct.pack("<I", 2)
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointFormatError, match="version"):
            checkpoint_read(str(path))

    def test_truncated(self, tmp_path):
        path = self._written(tmp_path)
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(CheckpointFormatError, match="payload"):
            checkpoint_read(str(path))
        path.write_bytes(b"VBQ")
        with pytest.raises(CheckpointFormatError, match="truncated"):
            checkpoint_read(str(path))

    def test_grid_mismatch(self, tmp_path):
        path = self._written(tmp_path)
        with pytest.raises(CheckpointFormatError, match="grid mismatch"):
            checkpoint_read(str(path), expected_N=64)

    def test_refuses_undealiased_state(self, tmp_path):
        grid = make_grid(16)
        w = grid.zeros()
        w[grid.index_of((7, 1))] = 1.0
        with pytest.raises(ValueError):
            checkpoint_write(State(w, grid.zeros()), VoigtParams(), str(tmp_path / "x.chk"))
