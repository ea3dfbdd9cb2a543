"""Test basic imports to prevent regressions."""


def test_pkg_import():
    import fhm_lab  # noqa: F401
    import fhm_lab.analysis  # noqa: F401
    import fhm_lab.geometry  # noqa: F401
    import fhm_lab.integrand  # noqa: F401
    import fhm_lab.measure  # noqa: F401
    import fhm_lab.solver  # noqa: F401


def test_cli_import():
    from fhm_lab.cli.app import build_parser

    p = build_parser()
    assert p.prog == "fhm-lab"
