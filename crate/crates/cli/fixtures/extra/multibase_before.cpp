class A {
public:
  int pad;
};
class B {
public:
  int pad2;
};
class D : A, B {
public:
  int x;
  int y;
  int keep;
};
