"""Independent reference computations shared by the tests."""

import itertools

import numpy as np


def dense_stiffness_oracle(mesh, cell_values):
    """Loop over cells, evaluate Q1 gradients at 2-point Gauss points from node coordinates."""
    coords = mesh.node_coordinates()
    h = np.asarray(mesh.h)
    gauss = np.array([-1.0, 1.0]) / np.sqrt(3.0)
    K = np.zeros((mesh.n_nodes, mesh.n_nodes))
    for c, nodes in enumerate(mesh.cell_nodes):
        xn = coords[nodes]
        lo = xn.min(axis=0)
        centre = lo + h / 2
        grads = []
        for pt in itertools.product(gauss, repeat=mesh.dim):
            x = centre + np.asarray(pt) * h / 2
            g = np.zeros((len(nodes), mesh.dim))
            for a, xa in enumerate(xn):
                factors = 1.0 - np.abs(x - xa) / h
                for k in range(mesh.dim):
                    sign = 1.0 if xa[k] > x[k] else -1.0
                    g[a, k] = sign / h[k] * np.prod(np.delete(factors, k))
            grads.append(g)
        weight = np.prod(h) / 2**mesh.dim
        ke = sum(g @ g.T for g in grads) * weight
        K[np.ix_(nodes, nodes)] += cell_values[c] * ke
    return K
