'''
Field files: a little-endian binary format and a debug CSV.

Binary layout: N as int64, then the N*N*3 values row-major as float64.
'''
import numpy as np

from torus.grid import ToroidalField3, ToroidalGrid

HEADER = np.dtype('<i8')
VALUE = np.dtype('<f8')


def write_field(field, path):
    with open(path, 'wb') as stream:
        stream.write(np.array([field.grid.n], dtype=HEADER).tobytes())
        stream.write(np.ascontiguousarray(field.values, dtype=VALUE).tobytes())


def read_field(path, on_sphere=None):
    '''
    Read a binary field file.

    :param bool on_sphere: require unit samples; by default the flag is
      set when the samples happen to be unit length.
    '''
    with open(path, 'rb') as stream:
        data = stream.read()
    if len(data) < HEADER.itemsize:
        raise ValueError('%s: truncated header' % path)
    n = int(np.frombuffer(data[:HEADER.itemsize], dtype=HEADER)[0])
    values = np.frombuffer(data[HEADER.itemsize:], dtype=VALUE)
    if values.size != n * n * 3:
        raise ValueError('%s: expected %i values for N=%i, found %i'
                         % (path, n * n * 3, n, values.size))
    grid = ToroidalGrid(n)
    values = values.reshape(n, n, 3)
    if on_sphere is None:
        on_sphere = bool(np.abs(np.linalg.norm(values, axis=-1) - 1).max()
                         <= 1e-12)
    return ToroidalField3(grid, values, on_sphere=on_sphere)


def write_field_csv(field, path):
    n = field.grid.n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing='ij')
    with open(path, 'w') as stream:
        stream.write('i,j,u1,u2,u3\n')
        for row in zip(i.ravel(), j.ravel(), field.values.reshape(-1, 3)):
            stream.write('%i,%i,%s\n' % (row[0], row[1],
                                         ','.join('%.17g' % c for c in row[2])))
