from setuptools import setup, find_packages

setup(name='voxcurv',
      version='0.1',
      description='Digital Gaussian, mean and principal curvatures, genus, multi-scale curvature maps and '
                  'curvature feature vectors of binary voxel objects',
      packages=find_packages(exclude=['tests']),
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.17', 'scipy'
      ],
      extras_require={
          'tests': ['pytest']
      },
      entry_points={
          'console_scripts': ['voxcurv=voxcurv.command_line_interface:main']
      }
      )
