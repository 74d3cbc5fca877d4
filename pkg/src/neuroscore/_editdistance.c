/* Weighted edit distance over arbitrary Python symbols; accelerates matching.weighted_levenshtein. */

#define PY_SSIZE_T_CLEAN
#include <Python.h>
#include <stdlib.h>

static int
same(PyObject *r, PyObject *h)
{
    if (PyAnySet_Check(h))
        return PySet_Contains(h, r);
    return PyObject_RichCompareBool(r, h, Py_EQ);
}

static PyObject *
weighted_levenshtein(PyObject *self, PyObject *args)
{
    PyObject *ref_in, *hyp_in, *ref = NULL, *hyp = NULL, *result = NULL;
    double sub, omit, extra;
    double *prev = NULL, *cur = NULL;

    if (!PyArg_ParseTuple(args, "OOddd", &ref_in, &hyp_in, &sub, &omit, &extra))
        return NULL;
    ref = PySequence_Fast(ref_in, "reference must be a sequence");
    if (ref == NULL)
        goto done;
    hyp = PySequence_Fast(hyp_in, "hypothesis must be a sequence");
    if (hyp == NULL)
        goto done;

    Py_ssize_t n = PySequence_Fast_GET_SIZE(ref);
    Py_ssize_t m = PySequence_Fast_GET_SIZE(hyp);
    PyObject **rs = PySequence_Fast_ITEMS(ref);
    PyObject **hs = PySequence_Fast_ITEMS(hyp);

    prev = PyMem_Malloc(sizeof(double) * (m + 1));
    cur = PyMem_Malloc(sizeof(double) * (m + 1));
    if (prev == NULL || cur == NULL) {
        PyErr_NoMemory();
        goto done;
    }
    for (Py_ssize_t j = 0; j <= m; j++)
        prev[j] = j * extra;
    for (Py_ssize_t i = 1; i <= n; i++) {
        PyObject *r = rs[i - 1];
        cur[0] = i * omit;
        for (Py_ssize_t j = 1; j <= m; j++) {
            int eq = same(r, hs[j - 1]);
            if (eq < 0)
                goto done;
            double d = eq ? prev[j - 1] : prev[j - 1] + sub;
            double x = prev[j] + omit;
            if (x < d)
                d = x;
            x = cur[j - 1] + extra;
            if (x < d)
                d = x;
            cur[j] = d;
        }
        double *tmp = prev;
        prev = cur;
        cur = tmp;
    }
    result = PyFloat_FromDouble(prev[m]);

done:
    PyMem_Free(prev);
    PyMem_Free(cur);
    Py_XDECREF(ref);
    Py_XDECREF(hyp);
    return result;
}

static PyMethodDef methods[] = {
    {"weighted_levenshtein", weighted_levenshtein, METH_VARARGS,
     "weighted_levenshtein(reference, hypothesis, sub, omit, extra) -> float"},
    {NULL, NULL, 0, NULL},
};

static struct PyModuleDef module = {
    PyModuleDef_HEAD_INIT, "_editdistance", NULL, -1, methods,
};

PyMODINIT_FUNC
PyInit__editdistance(void)
{
    return PyModule_Create(&module);
}
