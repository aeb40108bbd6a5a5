"""Hand-counted diffs for test-hunk counting: (name, diff text, expected)."""


def _d(path, body, old=None, new=None):
    old = old if old is not None else f"a/{path}"
    new = new if new is not None else f"b/{path}"
    return f"--- {old}\n+++ {new}\n{body}"


CASES = [
    ("two_added_runs", _d("tests/t_test.mini", "@@ -1,3 +1,5 @@\n a\n+x\n b\n+y\n c\n"), 2),
    ("block_of_30", _d("tests/t_test.mini", "@@ -1,1 +1,31 @@\n a\n" + "".join(f"+l{i}\n" for i in range(30))), 1),
    ("edit_is_one_run", _d("tests/t_test.mini", "@@ -1,3 +1,3 @@\n a\n-b\n+B\n c\n"), 1),
    ("pure_removal", _d("tests/t_test.mini", "@@ -1,3 +1,2 @@\n a\n-b\n c\n"), 0),
    ("removal_then_addition", _d("tests/t_test.mini", "@@ -1,4 +1,4 @@\n a\n-b\n c\n+d\n e\n"), 1),
    ("two_test_files",
     _d("tests/a_test.mini", "@@ -1,1 +1,2 @@\n a\n+b\n") + _d("tests/b_test.mini", "@@ -2,1 +2,2 @@\n a\n+b\n"), 2),
    ("new_test_file", _d("tests/n_test.mini", "@@ -0,0 +1,5 @@\n+1\n+2\n+3\n+4\n+5\n", old="/dev/null"), 1),
    ("deleted_test_file", _d("tests/d_test.mini", "@@ -1,2 +0,0 @@\n-1\n-2\n", new="/dev/null"), 0),
    ("two_hunks_two_runs_each",
     _d("tests/t_test.mini", "@@ -1,3 +1,5 @@\n a\n+x\n b\n+y\n c\n@@ -20,3 +22,5 @@\n a\n+x\n-b\n+B\n c\n+z\n"), 4),
    ("suffix_classified", _d("src/x_test.mini", "@@ -1,1 +1,2 @@\n a\n+b\n")
     + _d("src/x.mini", "@@ -1,1 +1,2 @@\n a\n+b\n"), 1),
]
