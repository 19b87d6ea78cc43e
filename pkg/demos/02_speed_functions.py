"""The speed grammar and the four-part admissibility check.

A speed phi(H) drives the normal velocity -phi(H) + h(t).  The checker
grades a candidate on: (i) positivity of phi and phi' on alpha > 0,
(ii) phi -> infinity, (iii) phi' alpha^2 / phi -> infinity, and (iv) the
concavity floor phi'' alpha >= -2 phi'.  Bounded or decreasing speeds are
rejected with a numeric witness.
"""

from hcflow import SpeedParseError, check_admissibility, parse_speed


def main():
    print("== parsing and evaluating ==")
    for source in ("H", "H^2", "sqrt(H)", "log(1+H) + H", "exp(H) - 1"):
        f = parse_speed(source)
        v, d1, d2 = f.eval(2.0)
        print(f"  {source:16s} phi(2)={v:12.6f}  phi'(2)={d1:10.6f}  "
              f"phi''(2)={d2:10.6f}")

    print("\n== a typo gets a caret, not a traceback ==")
    try:
        parse_speed("H + * 2")
    except SpeedParseError as e:
        print(f"  {e.source}")
        print(f"  {' ' * e.pos}^ {e}")

    print("\n== admissible speeds ==")
    for source in ("H", "H^0.25", "H^2", "log(1+H)+H", "exp(H)"):
        report = check_admissibility(source)
        print(f"  {source:14s} admissible={report.admissible}")

    print("\n== rejections carry witnesses ==")
    for source in ("H/(1+H)", "1/H"):
        report = check_admissibility(source)
        print(report.summary())


if __name__ == "__main__":
    main()
