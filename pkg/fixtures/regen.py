"""Regenerate derived fixture files.

Writes the bug corpus, the redundancy projects and the metrics history from
the definitions below, then recomputes the demo diff and coverage.

    python fixtures/regen.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

from mutest.diff import diff_trees, unified_diff
from mutest.minilang import load_project

HERE = Path(__file__).resolve().parent


def write_project(root: Path, src: dict[str, str], tests: dict[str, str]) -> None:
    for sub, files in (("src", src), ("tests", tests)):
        (root / sub).mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (root / sub / name).write_text(text, encoding="utf-8")


# Each bug: (buggy src, buggy tests, fixed src, fixed tests, diff context, coupled?)
BUGS: dict[str, dict] = {}


def bug(name, buggy_src, buggy_tests, fixed_src, new_tests, coupled, context=3, fixed_tests=None):
    BUGS[name] = dict(buggy_src=buggy_src, buggy_tests=buggy_tests, fixed_src=fixed_src,
                      fixed_tests=fixed_tests if fixed_tests is not None else buggy_tests + new_tests,
                      context=context, coupled=coupled)


bug("bug01_weighted_sum",
    """fn weighted_sum(n, w) {
    let s = 0;
    let i = 1;
    while (i < n) {
        s = s + w;
        i = i + 1;
    }
    return s;
}
""",
    """fn test_weighted_sum_empty() {
    assert_eq(weighted_sum(0, 3), 0);
}
""",
    """fn weighted_sum(n, w) {
    let s = 0;
    let i = 1;
    while (i <= n) {
        s = s + w;
        i = i + 1;
    }
    return s;
}
""",
    """
fn test_weighted_sum_three() {
    assert_eq(weighted_sum(3, 2), 6);
}
""", True)

bug("bug02_discount",
    """fn discount(price, pct) {
    let cut = price * pct / 100;
    return price + cut;
}
""",
    """fn test_discount_free() {
    assert_eq(discount(0, 50), 0);
}
""",
    """fn discount(price, pct) {
    let cut = price * pct / 100;
    return price - cut;
}
""",
    """
fn test_discount_ten() {
    assert_eq(discount(200, 10), 180);
}
""", True)

bug("bug03_tax",
    """fn tax(amount) {
    if (amount > 1000) {
        return amount / 10;
    }
    return 0;
}
""",
    """fn test_tax_small() {
    assert_eq(tax(5), 0);
}
""",
    """fn tax(amount) {
    if (amount >= 1000) {
        return amount / 10;
    }
    return 0;
}
""",
    """
fn test_tax_threshold() {
    assert_eq(tax(1000), 100);
}
""", True)

bug("bug04_shipping",
    """fn shipping(weight) {
    let cost = 5;
    if (weight > 10) {
        cost = cost + weight;
    }
    return cost;
}
""",
    """fn test_shipping_light() {
    assert_eq(shipping(1), 5);
}
""",
    """fn shipping(weight) {
    let cost = 5;
    if (weight >= 10) {
        cost = cost + weight;
    }
    return cost;
}
""",
    """
fn test_shipping_ten() {
    assert_eq(shipping(10), 15);
}
""", True)

bug("bug05_factorial",
    """fn factorial(n) {
    let r = 1;
    let i = 2;
    while (i < n) {
        r = r * i;
        i = i + 1;
    }
    return r;
}
""",
    """fn test_factorial_zero() {
    assert_eq(factorial(0), 1);
}

fn test_factorial_one() {
    assert_eq(factorial(1), 1);
}
""",
    """fn factorial(n) {
    let r = 1;
    let i = 2;
    while (i <= n) {
        r = r * i;
        i = i + 1;
    }
    return r;
}
""",
    """
fn test_factorial_three() {
    assert_eq(factorial(3), 6);
}
""", True)

bug("bug06_normalize",
    """fn normalize(x, step) {
    let r = x;
    if (r < 0) {
        r = r + step;
    }
    return r;
}
""",
    """fn test_normalize_positive() {
    assert_eq(normalize(3, 10), 3);
}
""",
    """fn normalize(x, step) {
    let r = x;
    while (r < 0) {
        r = r + step;
    }
    return r;
}
""",
    """
fn test_normalize_far_negative() {
    assert_eq(normalize(-25, 10), 5);
}
""", True)

bug("bug07_bonus",
    """fn bonus(sales, target) {
    let b = 0;
    if (sales > target * 2) {
        b = sales - target;
    }
    return b;
}
""",
    """fn test_bonus_none() {
    assert_eq(bonus(1, 10), 0);
}
""",
    """fn bonus(sales, target) {
    let b = 0;
    if (sales >= target * 2) {
        b = sales - target;
    }
    return b;
}
""",
    """
fn test_bonus_double() {
    assert_eq(bonus(20, 10), 10);
}
""", True)

bug("bug08_clamp",
    """fn clamp(x, lo, hi) {
    if (x < lo) {
        return lo;
    }
    return x;
}
""",
    """fn test_clamp_low() {
    assert_eq(clamp(-1, 0, 5), 0);
}

fn test_clamp_inside() {
    assert_eq(clamp(3, 0, 5), 3);
}
""",
    """fn clamp(x, lo, hi) {
    if (x < lo) {
        return lo;
    }
    if (x > hi) {
        return hi;
    }
    return x;
}
""",
    """
fn test_clamp_upper() {
    assert_eq(clamp(9, 0, 5), 5);
}
""", False)

bug("bug09_zero_context",
    """fn offset(x) {
    let base = x * 2;
    if (x > 100) {
        base = base - 1;
    }
    return base + 1;
}
""",
    """fn test_offset_small() {
    assert_eq(offset(1), 3);
}
""",
    """fn offset(x) {
    let base = x * 2;
    if (x >= 100) {
        base = base - 1;
    }
    return base + 1;
}
""",
    """
fn test_offset_hundred() {
    assert_eq(offset(100), 200);
}
""", False, context=0)

bug("bug10_well_tested",
    """fn price(qty, unit) {
    let base = qty * unit;
    return base + 1;
}
""",
    """fn test_price() {
    assert_eq(price(2, 3), 7);
}
""",
    """fn price(qty, unit) {
    let base = qty * unit;
    return base + 2;
}
""",
    "", False,
    fixed_tests="""fn test_price() {
    assert_eq(price(2, 3), 8);
}
""")


def build_bugs() -> None:
    corpus = HERE / "bugs"
    if corpus.exists():
        shutil.rmtree(corpus)
    expected = {}
    for name, b in BUGS.items():
        root = corpus / name
        module = name.split("_", 1)[1]
        write_project(root / "buggy", {f"{module}.mini": b["buggy_src"]}, {f"{module}_test.mini": b["buggy_tests"]})
        write_project(root / "fixed", {f"{module}.mini": b["fixed_src"]}, {f"{module}_test.mini": b["fixed_tests"]})
        (root / "fix.diff").write_text(diff_trees(root / "buggy", root / "fixed", context=b["context"]),
                                       encoding="utf-8")
        expected[name] = b["coupled"]
    (corpus / "expected.json").write_text(json.dumps(expected, indent=2) + "\n", encoding="utf-8")


def build_redundancy() -> None:
    base = HERE / "redundancy"
    if base.exists():
        shutil.rmtree(base)
    # Every line's mutants share a fate: `poly` is tested hard, `spare` not at all.
    write_project(base / "uniform", {
        "poly.mini": """fn poly(a, b) {
    return a * b + 7;
}

fn spare(x) {
    return x * 2 + 1;
}
""",
    }, {
        "poly_test.mini": """fn test_poly_positive() {
    assert_eq(poly(3, 5), 22);
}

fn test_poly_negative() {
    assert_eq(poly(-2, 4), -1);
}
""",
    })
    # `r = square(v);` holds exactly three mutants; negating the argument is
    # equivalent because squaring discards the sign.
    write_project(base / "crafted", {
        "square.mini": """fn square(v) {
    return v * v;
}

fn apply(v) {
    let r = 0;
    r = square(v);
    return r;
}
""",
    }, {
        "square_test.mini": """fn test_apply() {
    assert_eq(apply(3), 9);
}
""",
    })


def build_history() -> None:
    """Ten changes to one file; every change reports findings and adds one
    more test hunk than the previous one."""
    hist = HERE / "history"
    if hist.exists():
        shutil.rmtree(hist)
    hist.mkdir()
    src_old = "fn f(x) {\n    return x;\n}\n"
    for k in range(10):
        test_lines_old = [f"fn test_{i}() {{ assert_eq(f({i}), {i}); }}\n" for i in range(40)]
        test_lines_new = []
        for i, line in enumerate(test_lines_old):
            test_lines_new.append(line)
            if i % 4 == 1 and i // 4 <= k:
                test_lines_new.append(f"fn test_new_{k}_{i}() {{ assert_eq(f(1), 1); }}\n")
        src_new = src_old.replace("return x;", f"return x + {k} - {k};")
        diff = unified_diff({
            "src/f.mini": (src_old, src_new),
            "tests/f_test.mini": ("".join(test_lines_old), "".join(test_lines_new)),
        }, context=1)
        generated = 10
        record = {
            "change_id": f"c{k:02d}",
            "order": k,
            "files": {"src/f.mini": {"had_findings": True, "findings_count": 1,
                                     "generated": generated, "survived": max(0, 9 - k)}},
            "diff": diff,
        }
        (hist / f"c{k:02d}.json").write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


def build_demo() -> None:
    demo = HERE / "demo"
    (demo / "change.diff").write_text(diff_trees(demo / "base", demo / "head"), encoding="utf-8")
    project = load_project(demo / "head")
    cov: set = set()
    project.run_tests(coverage=cov)
    lines = ["file,line"] + [f"{p},{n}" for p, n in sorted(cov) if not p.startswith("tests/")]
    (demo / "coverage.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    build_bugs()
    build_redundancy()
    build_history()
    build_demo()
    sys.exit(0)
