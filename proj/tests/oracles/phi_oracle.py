"""High-precision reference values for the phi families (frozen into phi_test.cpp)."""
from mpmath import mp, mpf, sqrt, diff, im, mpc, odefun, quad, exp

mp.dps = 40


def randers(b2, s):
    return (sqrt(1 - b2 + s * s) + s) / (1 - b2)


def square(b2, s):
    r = sqrt(1 - b2 + s * s)
    return (r + s) ** 2 / ((1 - b2) ** 2 * r)


def sol03(sg, C, e1, e2):
    return lambda b2, s: 1 / (2 * sqrt(-sg)) / (e1 * sqrt(C - b2 + s * s) + e2 * s)


def br_i(sg, C, e):
    return lambda b2, s: e * sqrt(-(C - b2 + s * s) / sg) / (C - b2)


def br_ii(C, D, e):
    def f(b2, s):
        r = sqrt(C - b2 + s * s)
        return D / (r * (r + e * s) ** 2)
    return f


def br_iii(sg, C, D, e1, e2):
    r = sqrt(-sg)
    return lambda b2, s: 1 / (2 * r) * (1 / (e1 * sqrt(C + 2 * r * D - b2 + s * s) - s)
                                       - 1 / (e2 * sqrt(C - 2 * r * D - b2 + s * s) - s))


def br_iv(sg, C, D, e):
    def f(b2, s):
        z = mpc(C - b2 + s * s, 2 * sqrt(sg) * D)
        return im(1 / (e * sqrt(z) - s)) / sqrt(sg)
    return f


def qform(sg, C, D, large, e):
    def f(b2, s):
        u, v = b2 - s * s, s
        disc = (C - u) ** 2 + 4 * D * D * sg
        rp = ((C - u) + sqrt(disc)) / (2 * D * D)
        rm = ((C - u) - sqrt(disc)) / (2 * D * D)
        r = rp if large else rm
        q = e * sqrt(r)
        return q / (q * q * (D * q + v) ** 2 + sg)
    return f


def partials(f, b2, s):
    b2, s = mpf(b2), mpf(s)
    return [diff(f, (b2, s), (i, j)) for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]]


def pde1(f, b2, s):
    b2, s = mpf(b2), mpf(s)
    p = partials(f, b2, s)
    return p[5] - 2 * (p[1] - s * p[4])


def pde2n(f, kappa, K, b2, s):
    b2, s = mpf(b2), mpf(s)
    psi = lambda x, y: (diff(f, (x, y), (0, 1)) + 2 * y * diff(f, (x, y), (1, 0))) / (2 * f(x, y))
    ps = psi(b2, s)
    p1 = diff(psi, (b2, s), (1, 0))
    p2 = diff(psi, (b2, s), (0, 1))
    return kappa * (ps * ps - (p2 + 2 * s * p1)) - K * f(b2, s) ** 2


def show(name, f, b2, s, sg=None):
    p = partials(f, b2, s)
    print(name, ", ".join(mp.nstr(v, 17) for v in p))
    if sg is not None:
        print("   pde1", mp.nstr(pde1(f, b2, s), 3), "pde2n", mp.nstr(pde2n(f, 1, sg, b2, s), 3))


show("randers", randers, '0.25', '0.1')
show("square", square, '0.25', '0.1')
show("sol03", sol03(-1, 2, 1, 1), '0.5', '0.3', -1)
show("i_neg", br_i(-1, 2, 1), '1', '0.5', -1)
show("i_pos", br_i(mpf('0.5'), -1, -1), '0.3', '0.2', mpf('0.5'))
show("ii", br_ii(2, mpf('0.5'), 1), '0.5', '0.3', 0)
show("iii", br_iii(-1, 3, mpf('0.3'), 1, -1), '0.5', '0.2', -1)
show("iv", br_iv(1, 1, mpf('0.5'), -1), '0.5', '0.2', 1)
show("qform_neg", qform(mpf('-0.5'), 2, mpf('0.4'), False, -1), '0.5', '0.2', mpf('-0.5'))
show("qform_pos", qform(mpf('0.5'), 1, mpf('0.6'), True, 1), '0.5', '0.2', mpf('0.5'))

# projflat with k2 != 0: phibar from the profile ODE, eta by quadrature
k1, k2, k3 = mpf(1), mpf('0.5'), mpf(-1)
L = lambda t: 1 + (k1 + k3) * t * t + k2 * t ** 4
sol = odefun(lambda t, Y: [Y[1], (k1 + k2 * t * t) * (Y[0] - t * Y[1]) / L(t)], 0, [mpf(1), mpf('0.3')])
print("ode(0.4)", mp.nstr(sol(mpf('0.4'))[0], 17), "ode(0.8)", mp.nstr(sol(mpf('0.8'))[0], 17))
eta = lambda u: exp(-quad(lambda t: (k3 + k2 * t) / (2 * (1 + (k1 + k3) * t + k2 * t * t)), [0, u]))
print("eta(0.3)", mp.nstr(eta(mpf('0.3')), 17), "eta'(0.3)", mp.nstr(diff(eta, mpf('0.3')), 17))
b2, s = mpf('0.2'), mpf('0.1')
Lb = 1 + (k1 + k3) * b2 + k2 * b2 * b2
rho = sqrt(1 - (k1 + k3 + k2 * b2) * s * s / Lb)
nu = s / sqrt(Lb)
print("projflat(0.2,0.1)", mp.nstr(eta(b2) * rho * sol(nu / rho)[0], 17))
