#!/usr/bin/env python3
"""Independent symbolic oracle for the builtin evolving-surface problem.

Derives the forcing term f = du/dt + v.grad(u) + u div_G(v) - lap_G(u) on the
family of surfaces x^2/a(t)^2 + y^2 + z^2 = 1, a(t) = sqrt(1 + sin(2 pi t)/4),
with exact solution u = x y exp(-6 t), entirely in sympy (no C++ code shared).
Verifies the t=0 closed form and prints frozen numeric constants that the C++
unit tests assert against.

Run:  python3 tools/symbolic_oracle.py
"""

import sympy as sp


def surface_quantities(t, x, y, z):
    a2 = 1 + sp.sin(2 * sp.pi * t) / 4
    phi = x**2 / a2 + y**2 + z**2 - 1
    X = sp.Matrix([x, y, z])
    grad_phi = sp.Matrix([sp.diff(phi, c) for c in (x, y, z)])
    hess_phi = sp.hessian(phi, (x, y, z))
    norm = sp.sqrt(grad_phi.dot(grad_phi))
    nu = grad_phi / norm
    P = sp.eye(3) - nu * nu.T
    # Mean curvature as the trace of the tangential Jacobian of nu.
    H = sp.trace(P * hess_phi) / norm
    return phi, nu, H


def forcing(t, x, y, z):
    u = x * y * sp.exp(-6 * t)
    phi, nu, H = surface_quantities(t, x, y, z)
    vx = sp.pi * sp.cos(2 * sp.pi * t) / (4 + sp.sin(2 * sp.pi * t)) * x
    v = sp.Matrix([vx, 0, 0])

    grad_u = sp.Matrix([sp.diff(u, c) for c in (x, y, z)])
    hess_u = sp.hessian(u, (x, y, z))
    lap_u = sum(sp.diff(u, c, 2) for c in (x, y, z))
    lap_gamma_u = lap_u - (nu.T * hess_u * nu)[0, 0] - H * nu.dot(grad_u)

    jac_v = v.jacobian([x, y, z])
    div_gamma_v = sp.trace(jac_v) - (nu.T * jac_v * nu)[0, 0]

    f = sp.diff(u, t) + v.dot(grad_u) + u * div_gamma_v - lap_gamma_u
    return f, lap_gamma_u, div_gamma_v, phi


def on_surface_point(t, p):
    """Map a unit-sphere point p through the flow (a(t) p1, p2, p3)."""
    a = sp.sqrt(1 + sp.sin(2 * sp.pi * t) / 4)
    return (a * p[0], p[1], p[2])


def main():
    t, x, y, z = sp.symbols("t x y z", real=True)
    f, lapg_u, divg_v, phi = forcing(t, x, y, z)

    # --- closed form at t = 0 (surface is the unit sphere) -------------------
    f0 = f.subs(t, 0)
    claim = sp.pi / 4 * x * y * (2 - x**2)
    # Reduce on the surface: eliminate z^2 via z^2 = 1 - x^2 - y^2.
    diff0 = sp.simplify((f0 - claim).subs(z**2, 1 - x**2 - y**2))
    diff0 = sp.simplify(sp.expand(diff0))
    print("t=0 closed form residual (must be 0):", diff0)

    # --- Laplace-Beltrami reference values on the unit sphere ----------------
    lb_xy = sp.simplify(
        lapg_u.subs({t: 0}).subs(z**2, 1 - x**2 - y**2))
    print("lap_G(x y) on unit sphere (expect -6 x y):", sp.expand(lb_xy))

    # --- frozen numeric values ------------------------------------------------
    pts = [
        (sp.Integer(0), (1 / sp.sqrt(2), 1 / sp.sqrt(2), 0)),
        (sp.Integer(0), (1, 0, 0)),
        (sp.Rational(1, 10), (sp.Rational(3, 5), sp.Rational(16, 25), sp.Rational(12, 25))),
        (sp.Rational(1, 4), (sp.Rational(3, 5), sp.Rational(16, 25), sp.Rational(12, 25))),
        (sp.Rational(3, 5), (sp.Rational(3, 5), sp.Rational(16, 25), sp.Rational(12, 25))),
    ]
    print("\nfrozen forcing values f(x, t):")
    for tv, p in pts:
        X = on_surface_point(tv, p)
        val = f.subs({t: tv, x: X[0], y: X[1], z: X[2]})
        res = phi.subs({t: tv, x: X[0], y: X[1], z: X[2]})
        print(f"  t={sp.nsimplify(tv)} p=({sp.N(X[0],12)},{sp.N(X[1],12)},{sp.N(X[2],12)})"
              f" f={sp.N(val, 20)} (surface residual {sp.N(res, 3)})")

    print("\nfrozen tangential quantities at t=1/4, p=(3/5,16/25,12/25):")
    tv = sp.Rational(1, 4)
    p = (sp.Rational(3, 5), sp.Rational(16, 25), sp.Rational(12, 25))
    X = on_surface_point(tv, p)
    sub = {t: tv, x: X[0], y: X[1], z: X[2]}
    print("  lap_G u =", sp.N(lapg_u.subs(sub), 20))
    print("  div_G v =", sp.N(divg_v.subs(sub), 20))
    _, nu, H = surface_quantities(t, x, y, z)
    print("  H       =", sp.N(H.subs(sub), 20))
    print("  H at ellipsoid vertex t=1/4 (expect 2 sqrt(5)/2):",
          sp.N(H.subs({t: tv, x: sp.sqrt(sp.Rational(5, 4)), y: 0, z: 0}), 20))

    # --- surface areas used by the exact-form mass tests ----------------------
    import mpmath
    mpmath.mp.dps = 30
    print("\nsurface areas |Gamma(t)|:")
    th, ph2 = sp.symbols("th ph2", real=True)
    for tv in [sp.Integer(0), sp.Rational(1, 4), sp.Rational(3, 5)]:
        a = sp.sqrt(1 + sp.sin(2 * sp.pi * tv) / 4)
        # Parametrize: (a cos th, sin th cos ph, sin th sin ph); the area
        # element is independent of ph, so integrate th and scale by 2 pi.
        r = sp.Matrix([a * sp.cos(th), sp.sin(th) * sp.cos(ph2), sp.sin(th) * sp.sin(ph2)])
        J = r.diff(th).cross(r.diff(ph2))
        integrand = sp.sqrt(J.dot(J)).subs(ph2, 0)
        fint = sp.lambdify(th, integrand, "mpmath")
        val = mpmath.quad(fint, [0, mpmath.pi]) * 2 * mpmath.pi
        print(f"  t={tv}: {mpmath.nstr(val, 20)}")


if __name__ == "__main__":
    main()
