import io
import subprocess
import sys

import pytest

from qrekit.cli import (
    ConfigError,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    RunConfig,
    config_from_args,
    build_parser,
    format_value,
    main,
    parse_pattern,
    parse_scales,
    validate_config,
)
from qrekit.costs import BOTTOM


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


@pytest.fixture
def signal5(tmp_path):
    path = tmp_path / "sig.csv"
    truth = tmp_path / "truth.csv"
    code, _, err = cli("generate", "--seed", "3", "--width", "12", "-o", str(path), "--truth", str(truth))
    assert code == EXIT_OK, err
    return path, truth


def test_detect_wpm_five_rows(signal5, tmp_path):
    path, truth = signal5
    code, out, err = cli("detect", "wpm", str(path), "--scales", "8:32", "--sbar", "24", "--pbar", "876356")
    assert code == EXIT_OK, err
    table = rows(out)
    assert table[0] == "index,time,detector"
    found = [int(r.split(",")[0]) for r in table[1:]]
    centres = [int(r.split(",")[0]) for r in rows(truth.read_text())[1:]]
    assert len(found) == 5
    assert all(abs(a - b) <= 2 for a, b in zip(found, centres))


def test_engines_agree_on_cli(signal5):
    path, _ = signal5
    args = ["detect", "wpb", str(path), "--scales", "8:20", "--sbar", "16", "--pbar", "500000", "--bl", "150"]
    assert rows(cli(*args, "--engine", "qre")[1]) == rows(cli(*args, "--engine", "fast")[1])


def test_qre_eval_fold(tmp_path):
    items = tmp_path / "items.csv"
    items.write_text("v\n" + "\n".join(["0.5"] * 5) + "\n")
    code, out, err = cli("qre-eval", "iter(p, basic(true, 1))", "--input", str(items), "--init", "p=0")
    assert code == EXIT_OK, err
    assert out.strip() == "5"


def test_qre_eval_prefixes_and_file(tmp_path):
    items = tmp_path / "items.csv"
    items.write_text("t,v\n0,1\n1,4\n2,2\n")
    expr = tmp_path / "max.qre"
    expr.write_text("# running maximum\niter(max, p, basic(true, v))\n")
    code, out, _ = cli("qre-eval", "--file", str(expr), "--input", str(items), "--init", "p=0", "--prefixes")
    assert code == EXIT_OK
    assert rows(out) == ["1", "4", "4"]


def test_qre_eval_missing_parameter(tmp_path):
    items = tmp_path / "items.csv"
    items.write_text("v\n1\n")
    code, _, err = cli("qre-eval", "iter(p, basic(true, 1))", "--input", str(items))
    assert code == EXIT_VALIDATION
    assert "[complete-valuation]" in err


def test_qre_eval_undefined(tmp_path):
    items = tmp_path / "items.csv"
    items.write_text("v\n1\n2\n")
    code, out, _ = cli("qre-eval", "basic(true, v)", "--input", str(items))
    assert code == EXIT_OK and out.strip() == "undefined"


def test_mdt_zero_signal(tmp_path):
    path = tmp_path / "zero.csv"
    path.write_text("t,v\n" + "".join(f"{k / 1000},0\n" for k in range(2000)))
    trace = tmp_path / "trace.csv"
    code, out, _ = cli("detect", "mdt", str(path), "--bl", "150", "--trace", str(trace))
    assert code == EXIT_OK
    assert rows(out) == ["index,time,detector"]
    assert len(rows(trace.read_text())) == 2001


def test_header_records_parameters(signal5):
    path, _ = signal5
    _, out, _ = cli("detect", "mdt", str(path))
    header = [l for l in out.splitlines() if l.startswith("#")]
    assert header[0] == "# qrekit detect"
    assert any("bl=150" in l for l in header)


def test_generate_is_deterministic(tmp_path):
    a = cli("generate", "--seed", "9")[1]
    b = cli("generate", "--seed", "9")[1]
    c = cli("generate", "--seed", "10")[1]
    assert a == b != c


def test_cwt_outputs(signal5, tmp_path):
    path, _ = signal5
    code, out, _ = cli("cwt", str(path), "--scales", "1:3")
    assert code == EXIT_OK
    assert rows(out)[0] == "s,t,w"
    binary = tmp_path / "sp.bin"
    assert cli("cwt", str(path), "--scales", "1:3", "--format", "binary", "-o", str(binary))[0] == EXIT_OK
    assert binary.read_bytes()[:4] == b"QSPG"


def test_discriminate_pattern(tmp_path):
    path = tmp_path / "ch.csv"
    path.write_text("t,chamber\n" + "".join(f"{k},{c}\n" for k, c in enumerate("V0A0V0A0V")))
    code, out, err = cli("discriminate", "pattern", str(path), "--pattern", "1:2,1:2,1:2,1:2")
    assert code == EXIT_OK, err
    assert rows(out)[-1].endswith(",true")


def test_discriminate_count_and_rate(tmp_path):
    path = tmp_path / "beats.csv"
    path.write_text("t,beat\n" + "".join(f"{k},{int(k % 3 == 0)}\n" for k in range(12)))
    code, out, _ = cli("discriminate", "count", str(path), "--window", "6", "--lo", "2", "--hi", "2")
    assert code == EXIT_OK
    assert rows(out)[1:] and all(r.endswith(",true") for r in rows(out)[1:])
    code, out, _ = cli("discriminate", "rate", str(path), "--window", "3")
    assert code == EXIT_OK and len(rows(out)) == 13


def test_discriminate_from_annotation(signal5, tmp_path):
    path, truth = signal5
    code, out, err = cli("discriminate", "rate", str(truth), "--window", "2000", "--length", "2500")
    assert code == EXIT_OK, err
    centres = [int(r.split(",")[0]) for r in rows(truth.read_text())[1:]]
    recent = sum(1 for c in centres if c >= 2500 - 2000)
    assert float(rows(out)[-1].split(",")[-1]) == pytest.approx(recent / 2000)


@pytest.mark.parametrize(
    "argv,invariant",
    [
        (["detect", "wpm", "{sig}", "--pbar", "1"], "sbar-given"),
        (["detect", "wpm", "{sig}", "--sbar", "7.5", "--pbar", "1", "--scales", "1:8"], "sbar-in-grid"),
        (["detect", "wpm", "{sig}", "--sbar", "8", "--pbar", "-1", "--scales", "1:8"], "pbar-positive"),
        (["detect", "wpm", "{sig}", "--sbar", "8", "--pbar", "1", "--scales", "1:8", "--eps", "0.5"], "eps-covers-grid-step"),
        (["detect", "wpm", "{sig}", "--sbar", "8", "--pbar", "1", "--scales", "1:8", "--delta", "-1"], "delta-nonnegative-integer"),
        (["detect", "mdt", "{sig}", "--pmin", "500"], "pmin-le-init"),
        (["detect", "mdt", "{sig}", "--bl", "0"], "blanking-positive"),
        (["cwt", "{sig}", "--scales", "5:1"], "scale-grid"),
        (["cwt", "{sig}", "--order", "0"], "wavelet-order"),
        (["discriminate", "count", "{sig}", "--lo", "3", "--hi", "1"], "range-ordered"),
        (["discriminate", "count", "{sig}"], "range-given"),
        (["discriminate", "pattern", "{sig}", "--pattern", "2:1,0:0,0:0,0:0"], "pattern-bounds"),
        (["generate", "--min-gap", "5", "--width", "3"], "gap-exceeds-3-widths"),
        (["generate", "--spikes", "0"], "spike-count"),
        (["generate", "--noise-ratio", "-1"], "noise-nonnegative"),
    ],
)
def test_validation_errors(argv, invariant, signal5):
    path, _ = signal5
    code, _, err = cli(*[a.replace("{sig}", str(path)) for a in argv])
    assert code == EXIT_VALIDATION
    assert f"[{invariant}]" in err


def test_io_errors(tmp_path):
    assert cli("detect", "mdt", str(tmp_path / "missing.csv"))[0] == EXIT_IO
    bad = tmp_path / "bad.csv"
    bad.write_text("t,v\n0,1\n0.001,x\n")
    code, _, err = cli("detect", "mdt", str(bad))
    assert code == EXIT_IO and "line 3" in err


def test_parse_errors_are_validation(tmp_path):
    items = tmp_path / "items.csv"
    items.write_text("v\n1\n")
    assert cli("qre-eval", "basic(true", "--input", str(items))[0] == EXIT_VALIDATION


def test_preset_fills_missing_fields():
    args = build_parser().parse_args(["detect", "wpm", "x.csv", "--preset", "nominal-vt", "--pbar", "10"])
    cfg = config_from_args(args)
    assert (cfg.sbar, cfg.bl, cfg.pbar) == (80.0, 150, 10.0)


def test_helpers():
    assert parse_scales("2:8:2").scales == (2.0, 4.0, 6.0, 8.0)
    assert list(parse_pattern("1:2,0:3,1:1,2:4")) == [1, 2, 0, 3, 1, 1, 2, 4]
    with pytest.raises(ConfigError):
        parse_pattern("1:2")
    assert format_value(BOTTOM) == "undefined"
    assert format_value(True) == "true"
    assert format_value(2.5) == "2.5"


def test_validate_config_reports_invariant():
    with pytest.raises(ConfigError) as err:
        validate_config(RunConfig(command="detect", detector="wpm", input="x", sbar=8.0, pbar=1.0, scales="1:8", eps=0.0))
    assert err.value.invariant == "eps-positive"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qrekit.cli", "generate", "--seed", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "t,v" in proc.stdout
