"""CLI: schema validation, dispatch, canonical output, exit codes."""

import json

import numpy as np
import pytest

from formleb.cli import (
    ParseError,
    emit_output,
    main,
    parse_input,
    run_command,
)
from formleb.linalg import DEFAULT_TOL


def enc_matrix(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def enc_measure(values):
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)]


def payload(**fields):
    return json.dumps(fields).encode()


GOLDEN_DECOMPOSE = payload(
    kind="decompose",
    t=enc_matrix(np.diag([-1.0, 1.0, 0.0])),
    omega=enc_matrix(np.diag([0.0, 1.0, 1.0])),
    sigma=enc_matrix(np.diag([1.0, 1.0, 0.0])),
)


def decode_matrix(entry):
    return np.array([[complex(re, im) for re, im in row] for row in entry])


class TestParseInput:
    def test_golden_payload(self):
        problem = parse_input(GOLDEN_DECOMPOSE)
        assert problem.kind == "decompose"
        assert problem.dim == 3
        assert set(problem.matrices) == {"t", "omega", "sigma"}

    def test_one_dimensional_zero_form(self):
        problem = parse_input(b'{"kind":"classify","dim":1,"t":[[[0,0]]]}')
        assert problem.dim == 1
        assert problem.matrices["t"].shape == (1, 1)

    def test_non_square_matrix_names_field(self):
        bad = payload(kind="classify", t=[[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]])
        with pytest.raises(ParseError) as err:
            parse_input(bad)
        assert err.value.code == "DIM_MISMATCH"
        assert err.value.path.startswith("t")

    def test_dim_inconsistency_between_matrices(self):
        bad = payload(
            kind="decompose",
            t=enc_matrix(np.zeros((2, 2))),
            omega=enc_matrix(np.zeros((3, 3))),
        )
        with pytest.raises(ParseError) as err:
            parse_input(bad)
        assert err.value.code == "DIM_MISMATCH"
        assert err.value.path == "omega"

    def test_malformed_json(self):
        with pytest.raises(ParseError) as err:
            parse_input(b"{not json")
        assert err.value.code == "MALFORMED_JSON"

    def test_unknown_field(self):
        with pytest.raises(ParseError) as err:
            parse_input(payload(kind="classify", t=[[[0, 0]]], bogus=1))
        assert err.value.code == "SCHEMA_VIOLATION"
        assert err.value.path == "bogus"

    def test_unknown_kind(self):
        with pytest.raises(ParseError) as err:
            parse_input(payload(kind="explode"))
        assert err.value.path == "kind"

    def test_missing_required_matrix(self):
        with pytest.raises(ParseError) as err:
            parse_input(payload(kind="decompose", t=[[[0, 0]]]))
        assert err.value.path == "omega"

    def test_check_requires_subkind(self):
        with pytest.raises(ParseError) as err:
            parse_input(payload(kind="check", t=[[[0, 0]]]))
        assert err.value.path == "check"

    def test_measure_payload(self):
        problem = parse_input(
            payload(
                kind="measure",
                atoms=["a", "b", "c"],
                mu=enc_measure([3 + 1j, 2.0, 0.0]),
                nu=enc_measure([0.0, 1.0, 2.0]),
            )
        )
        assert problem.atoms == ("a", "b", "c")
        assert problem.measures["mu"].shape == (3,)

    def test_measure_length_mismatch(self):
        with pytest.raises(ParseError) as err:
            parse_input(
                payload(kind="measure", atoms=["a", "b"], mu=enc_measure([1.0]), nu=enc_measure([1.0, 2.0]))
            )
        assert err.value.code == "DIM_MISMATCH"
        assert err.value.path == "mu"

    def test_tol_override(self):
        problem = parse_input(
            payload(kind="classify", t=[[[0, 0]]], tol={"rank_rel": 1e-8})
        )
        assert problem.tol.rank_rel == 1e-8
        assert problem.tol.psd_abs == DEFAULT_TOL.psd_abs

    def test_tol_rejects_unknown_key(self):
        with pytest.raises(ParseError) as err:
            parse_input(payload(kind="classify", t=[[[0, 0]]], tol={"nope": 0.1}))
        assert err.value.path == "tol.nope"


class TestRunCommand:
    def test_golden_decompose(self):
        problem = parse_input(GOLDEN_DECOMPOSE)
        result = run_command("decompose", problem)
        assert result.status == "ok"
        t_r = decode_matrix(result.results["t_r"])
        t_m = decode_matrix(result.results["t_m"])
        t_ss = decode_matrix(result.results["t_ss"])
        assert np.allclose(t_r, np.diag([0.0, 1.0, 0.0]), atol=1e-9)
        assert np.allclose(t_m, np.zeros((3, 3)), atol=1e-9)
        assert np.allclose(t_ss, np.diag([-1.0, 0.0, 0.0]), atol=1e-9)

    def test_decompose_without_sigma_constructs_one(self):
        problem = parse_input(
            payload(
                kind="decompose",
                t=enc_matrix(np.diag([-1.0, 1.0, 0.0])),
                omega=enc_matrix(np.diag([0.0, 1.0, 1.0])),
            )
        )
        result = run_command("decompose", problem)
        assert result.status == "ok"
        assert result.diagnostics["sigma_provided"] is False
        assert np.allclose(decode_matrix(result.results["sigma"]), np.diag([1, 1, 0]))

    def test_measure_command(self):
        problem = parse_input(
            payload(
                kind="measure",
                atoms=["a", "b", "c"],
                mu=enc_measure([3 + 1j, 2.0, 0.0]),
                nu=enc_measure([0.0, 1.0, 2.0]),
            )
        )
        result = run_command("measure", problem)
        assert result.status == "ok"
        mu_a = result.results["mu_a"]
        mu_s = result.results["mu_s"]
        assert mu_a == [[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]]
        assert mu_s == [[3.0, 1.0], [0.0, 0.0], [0.0, 0.0]]
        assert result.results["support"] == ["b", "c"]

    def test_check_membership(self):
        problem = parse_input(
            payload(
                kind="check",
                check="membership",
                sigma=enc_matrix(np.diag([1.0, 1.0, 0.0])),
                t=enc_matrix(np.diag([-1.0, 1.0, 0.0])),
            )
        )
        result = run_command("check", problem)
        assert result.status == "ok" and result.results["result"] is True

    def test_check_omega_bounded_reports_constant(self):
        problem = parse_input(
            payload(
                kind="check",
                check="omega-bounded",
                t=enc_matrix(np.diag([0.0, 1.0, 0.0])),
                omega=enc_matrix(np.diag([0.0, 1.0, 1.0])),
            )
        )
        result = run_command("check", problem)
        assert result.results["result"] is True
        assert result.results["constant"] == pytest.approx(1.0)

    def test_domain_error_not_psd(self):
        problem = parse_input(
            payload(
                kind="decompose-nonneg",
                sigma=enc_matrix(np.diag([-1.0, 1.0])),
                omega=enc_matrix(np.eye(2)),
            )
        )
        result = run_command("decompose-nonneg", problem)
        assert result.status == "error"
        assert result.error["code"] == "NOT_PSD"

    def test_domain_error_not_dominating(self):
        problem = parse_input(
            payload(
                kind="decompose",
                t=enc_matrix(np.diag([-1.0, 1.0, 0.0])),
                omega=enc_matrix(np.diag([0.0, 1.0, 1.0])),
                sigma=enc_matrix(np.diag([0.0, 1.0, 1.0])),
            )
        )
        result = run_command("decompose", problem)
        assert result.status == "error"
        assert result.error["code"] == "NOT_DOMINATING"

    def test_kind_subcommand_mismatch(self):
        problem = parse_input(GOLDEN_DECOMPOSE)
        with pytest.raises(ParseError):
            run_command("classify", problem)

    def test_selftest(self):
        result = run_command("selftest", None)
        assert result.status == "ok"
        assert result.results["golden_passed"] == result.results["golden_total"]
        assert result.results["property_passed"] == result.results["property_total"]
        assert result.results["failures"] == []


class TestEmitOutput:
    def test_round_trip(self):
        problem = parse_input(GOLDEN_DECOMPOSE)
        result = run_command("decompose", problem)
        for pretty in (False, True):
            text = emit_output(result, pretty=pretty)
            decoded = json.loads(text)
            assert decoded == result.to_obj()

    def test_numbers_survive_round_trip_exactly(self):
        problem = parse_input(
            payload(
                kind="classify",
                t=enc_matrix(np.array([[1 / 3 + (1 / 7) * 1j]])),
            )
        )
        result = run_command("classify", problem)
        decoded = json.loads(emit_output(result))
        assert decoded["results"]["c"] == result.results["c"]

    def test_deterministic_bytes(self):
        problem = parse_input(GOLDEN_DECOMPOSE)
        first = emit_output(run_command("decompose", problem))
        second = emit_output(run_command("decompose", parse_input(GOLDEN_DECOMPOSE)))
        assert first == second


class TestMain:
    def run(self, argv, stdin: bytes, capsysbinary):
        import io
        import sys

        old = sys.stdin
        sys.stdin = type("S", (), {"buffer": io.BytesIO(stdin)})()
        try:
            code = main(argv)
        finally:
            sys.stdin = old
        out, _ = capsysbinary.readouterr()
        return code, out

    def test_stdin_stdout_golden(self, capsysbinary):
        code, out = self.run(["decompose"], GOLDEN_DECOMPOSE, capsysbinary)
        assert code == 0
        decoded = json.loads(out)
        assert decoded["status"] == "ok"
        assert np.allclose(decode_matrix(decoded["results"]["t_r"]), np.diag([0, 1, 0]))

    def test_file_io(self, tmp_path):
        src = tmp_path / "in.json"
        dst = tmp_path / "out.json"
        src.write_bytes(GOLDEN_DECOMPOSE)
        assert main(["decompose", "-i", str(src), "-o", str(dst)]) == 0
        decoded = json.loads(dst.read_bytes())
        assert decoded["status"] == "ok"

    def test_parse_error_exit_1(self, capsysbinary):
        code, out = self.run(["decompose"], b"{broken", capsysbinary)
        assert code == 1
        decoded = json.loads(out)
        assert decoded["status"] == "error"
        assert decoded["error"]["code"] == "MALFORMED_JSON"

    def test_domain_error_exit_2(self, capsysbinary):
        bad = payload(
            kind="decompose-nonneg",
            sigma=enc_matrix(np.diag([-1.0, 1.0])),
            omega=enc_matrix(np.eye(2)),
        )
        code, out = self.run(["decompose-nonneg"], bad, capsysbinary)
        assert code == 2
        assert json.loads(out)["error"]["code"] == "NOT_PSD"

    def test_usage_error_exit_1(self, capsysbinary):
        assert main(["no-such-command"]) == 1

    def test_identical_bytes_across_runs(self, capsysbinary):
        code1, out1 = self.run(["decompose"], GOLDEN_DECOMPOSE, capsysbinary)
        code2, out2 = self.run(["decompose"], GOLDEN_DECOMPOSE, capsysbinary)
        assert (code1, out1) == (code2, out2)

    def test_tol_flag_wins_over_json_and_env(self, capsysbinary, monkeypatch):
        monkeypatch.setenv("FORMLEB_TOL", "1e-6")
        body = payload(kind="classify", t=[[[1, 0]]], tol={"rank_rel": 1e-7})
        code, out = self.run(["classify", "--tol", "1e-5"], body, capsysbinary)
        assert code == 0
        assert json.loads(out)["diagnostics"]["tolerance"]["rank_rel"] == 1e-5

    def test_env_sets_default_tol(self, capsysbinary, monkeypatch):
        monkeypatch.setenv("FORMLEB_TOL", "1e-6")
        code, out = self.run(["classify"], payload(kind="classify", t=[[[1, 0]]]), capsysbinary)
        assert code == 0
        assert json.loads(out)["diagnostics"]["tolerance"]["rank_rel"] == 1e-6

    def test_json_tol_beats_env(self, capsysbinary, monkeypatch):
        monkeypatch.setenv("FORMLEB_TOL", "1e-6")
        body = payload(kind="classify", t=[[[1, 0]]], tol={"rank_rel": 1e-7})
        code, out = self.run(["classify"], body, capsysbinary)
        assert code == 0
        assert json.loads(out)["diagnostics"]["tolerance"]["rank_rel"] == 1e-7

    def test_pretty_output(self, capsysbinary):
        code, out = self.run(["classify", "--pretty"], payload(kind="classify", t=[[[1, 0]]]), capsysbinary)
        assert code == 0
        assert out.startswith(b"{\n")
        assert json.loads(out)["status"] == "ok"
