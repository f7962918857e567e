class A {
public:
  int pad;
  int x;
};
class B {
public:
  int pad2;
  int y;
};
class D : A, B {
public:
  int keep;
};
