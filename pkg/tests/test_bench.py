import pathlib
import subprocess
import sys

SCRIPT = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs():
    out = subprocess.run([sys.executable, str(SCRIPT), "--repeat", "1"], capture_output=True,
                         text=True, check=True).stdout
    assert "ingredients" in out and "accumulate" in out and "transport" in out
